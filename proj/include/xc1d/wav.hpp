#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "xc1d/errors.hpp"

namespace xc1d {

inline constexpr std::uint32_t kSampleRate = 16000;
inline constexpr std::size_t kClipSamples = 16000;
/// Largest value representable as a 16-bit sample: 1 - 2^-15.
inline constexpr float kMaxSample = 32767.0f / 32768.0f;

enum class WavErrorKind {
  kMalformedHeader,
  kUnsupportedFormat,
  kTruncatedData,
};

const char* to_string(WavErrorKind kind);

class WavError : public DataError {
 public:
  WavError(WavErrorKind kind, const std::string& detail)
      : DataError(std::string("wav: ") + to_string(kind) + ": " + detail),
        kind_(kind),
        detail_(detail) {}
  WavErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  WavErrorKind kind_;
  std::string detail_;
};

struct WavData {
  std::vector<float> samples;
  std::uint32_t sample_rate = 0;
};

/// Parses a RIFF/WAVE PCM file: format code 1, mono, 16-bit little-endian.
/// Samples map to s / 32768. Never reads outside `bytes`.
WavData read_wav(std::span<const std::uint8_t> bytes);
WavData read_wav_file(const std::filesystem::path& path);

/// Canonical 44-byte-header PCM encoding; samples are rounded to the nearest
/// 16-bit step and clamped to [-1, 1 - 2^-15].
std::vector<std::uint8_t> encode_wav(std::span<const float> samples,
                                     std::uint32_t sample_rate = kSampleRate);
void write_wav(std::span<const float> samples, const std::filesystem::path& path,
               std::uint32_t sample_rate = kSampleRate);

/// Right-pads short input with zeros and centre-crops long input.
std::vector<float> normalize_length(std::span<const float> samples,
                                    std::size_t target = kClipSamples);

/// A fixed-length waveform with its provenance. augmentation == 0 marks an
/// original recording; k > 0 is the k-th distorted copy.
struct AudioClip {
  std::vector<float> samples;
  std::uint32_t sample_rate = kSampleRate;
  std::string word;
  std::string speaker_id;
  std::string source_path;
  std::uint32_t augmentation = 0;

  bool augmented() const { return augmentation != 0; }
};

/// Reads, checks the 16 kHz rate (no resampling), and normalizes to
/// kClipSamples.
AudioClip load_clip(const std::filesystem::path& file, std::string word,
                    std::string speaker_id, std::string source_path);

}  // namespace xc1d
