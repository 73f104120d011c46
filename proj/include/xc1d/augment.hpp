#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "xc1d/rng.hpp"
#include "xc1d/wav.hpp"

namespace xc1d {

/// Intensity ranges for the five distortions. Each copy draws every
/// parameter uniformly from its range.
struct AugmentConfig {
  double resample_min = 0.85;
  double resample_max = 1.15;
  double gain_min = 0.7;
  double gain_max = 1.3;
  std::int64_t offset_min = -1600;  // samples (100 ms at 16 kHz)
  std::int64_t offset_max = 1600;
  double noise_sigma_min = 0.0;
  double noise_sigma_max = 0.01;
  double pitch_min = -2.0;  // semitones
  double pitch_max = 2.0;
  std::uint32_t copies = 5;

  void validate() const;
};

/// Linear interpolation at positions i * factor; output length
/// round(L / factor). Positions past the end interpolate towards zero.
std::vector<float> resample(std::span<const float> samples, double factor);

/// clamp(gain * x, -1, 1 - 2^-15)
std::vector<float> saturate(std::span<const float> samples, double gain);

/// Shifts right by k (left when negative), zero-filling. Requires |k| < L.
std::vector<float> time_offset(std::span<const float> samples, std::int64_t k);

/// clamp(x + N(0, sigma^2), -1, 1 - 2^-15) with draws from rng.
std::vector<float> add_white_noise(std::span<const float> samples, double sigma,
                                   Rng& rng);

/// Waveform-similarity overlap-add time stretch to exactly `target` samples:
/// 25 ms triangular frames, 50% overlap, each frame shifted by up to half a
/// hop to best continue the previous one.
std::vector<float> time_stretch(std::span<const float> samples,
                                std::size_t target);

/// Resample by 2^(semitones / 12) then time-stretch back to the input length.
std::vector<float> pitch_shift(std::span<const float> samples, double semitones);

struct AugmentParams {
  double resample_factor = 1.0;
  double semitones = 0.0;
  std::int64_t offset = 0;
  double gain = 1.0;
  double noise_sigma = 0.0;
};

/// Generator for one distorted copy; depends only on (seed, path, copy).
Rng augment_rng(std::uint64_t seed, const std::string& source_path,
                std::uint32_t copy_index);
AugmentParams draw_augment_params(const AugmentConfig& config, Rng& rng);

/// Applies resample -> pitch shift -> time offset -> saturation -> noise and
/// re-normalizes to kClipSamples. copy_index must be >= 1.
AudioClip augment_clip(const AudioClip& clip, const AugmentConfig& config,
                       std::uint64_t seed, std::uint32_t copy_index);

/// Originals (in order) followed by `copies` distorted versions of each clip,
/// clip-major. Independent of thread count.
std::vector<AudioClip> expand_training_set(const std::vector<AudioClip>& clips,
                                           const AugmentConfig& config,
                                           std::uint64_t seed);

}  // namespace xc1d
