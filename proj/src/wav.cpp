#include "xc1d/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace xc1d {
namespace {

std::uint16_t read_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) |
         (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char* tag) {
  return std::memcmp(b.data() + at, tag, 4) == 0;
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

}  // namespace

const char* to_string(WavErrorKind kind) {
  switch (kind) {
    case WavErrorKind::kMalformedHeader:
      return "malformed-header";
    case WavErrorKind::kUnsupportedFormat:
      return "unsupported-format";
    case WavErrorKind::kTruncatedData:
      return "truncated-data";
  }
  return "unknown";
}

WavData read_wav(std::span<const std::uint8_t> bytes) {
  using K = WavErrorKind;
  if (bytes.size() < 12) throw WavError(K::kMalformedHeader, "shorter than RIFF header");
  if (!tag_is(bytes, 0, "RIFF") || !tag_is(bytes, 8, "WAVE")) {
    throw WavError(K::kMalformedHeader, "missing RIFF/WAVE signature");
  }
  // Chunks may not extend past the declared RIFF size nor the buffer.
  const std::uint64_t declared = static_cast<std::uint64_t>(read_u32(bytes, 4)) + 8;
  const std::size_t end =
      static_cast<std::size_t>(std::min<std::uint64_t>(declared, bytes.size()));

  bool have_fmt = false;
  WavData out;
  std::size_t pos = 12;
  while (true) {
    if (pos + 8 > end) {
      throw WavError(have_fmt ? K::kTruncatedData : K::kMalformedHeader,
                     "no data chunk");
    }
    const std::uint32_t size = read_u32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    const bool is_data = tag_is(bytes, pos, "data");
    if (size > end - body) {
      throw WavError(is_data ? K::kTruncatedData : K::kMalformedHeader,
                     "chunk extends past end of file");
    }
    if (tag_is(bytes, pos, "fmt ")) {
      if (size < 16) throw WavError(K::kMalformedHeader, "fmt chunk too short");
      const std::uint16_t format = read_u16(bytes, body);
      const std::uint16_t channels = read_u16(bytes, body + 2);
      const std::uint32_t rate = read_u32(bytes, body + 4);
      const std::uint16_t block_align = read_u16(bytes, body + 12);
      const std::uint16_t bits = read_u16(bytes, body + 14);
      if (format != 1) {
        throw WavError(K::kUnsupportedFormat,
                       "format code " + std::to_string(format) + " is not PCM");
      }
      if (channels != 1) {
        throw WavError(K::kUnsupportedFormat,
                       std::to_string(channels) + " channels, expected mono");
      }
      if (bits != 16) {
        throw WavError(K::kUnsupportedFormat,
                       std::to_string(bits) + "-bit samples, expected 16");
      }
      if (block_align != 2) {
        throw WavError(K::kMalformedHeader, "block align inconsistent with mono 16-bit");
      }
      if (rate == 0) throw WavError(K::kMalformedHeader, "zero sample rate");
      out.sample_rate = rate;
      have_fmt = true;
    } else if (is_data) {
      if (!have_fmt) throw WavError(K::kMalformedHeader, "data chunk before fmt chunk");
      if (size % 2 != 0) throw WavError(K::kTruncatedData, "odd number of data bytes");
      out.samples.resize(size / 2);
      for (std::size_t i = 0; i < out.samples.size(); ++i) {
        const auto s = static_cast<std::int16_t>(read_u16(bytes, body + 2 * i));
        out.samples[i] = static_cast<float>(s) / 32768.0f;
      }
      return out;
    }
    pos = body + size + (size & 1u);
  }
}

WavData read_wav_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("wav: cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw DataError("wav: read error on '" + path.string() + "'");
  try {
    return read_wav(bytes);
  } catch (const WavError& e) {
    throw WavError(e.kind(), path.string() + ": " + e.detail());
  }
}

std::vector<std::uint8_t> encode_wav(std::span<const float> samples,
                                     std::uint32_t sample_rate) {
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, 1);
  put_u16(out, 1);
  put_u32(out, sample_rate);
  put_u32(out, sample_rate * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  put_tag(out, "data");
  put_u32(out, data_bytes);
  for (float x : samples) {
    double q = std::isfinite(x) ? std::nearbyint(static_cast<double>(x) * 32768.0) : 0.0;
    q = std::clamp(q, -32768.0, 32767.0);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  return out;
}

void write_wav(std::span<const float> samples, const std::filesystem::path& path,
               std::uint32_t sample_rate) {
  const auto bytes = encode_wav(samples, sample_rate);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("wav: cannot create '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("wav: write error on '" + path.string() + "'");
}

std::vector<float> normalize_length(std::span<const float> samples,
                                    std::size_t target) {
  if (samples.empty()) throw DataError("normalize_length: empty input");
  std::vector<float> out(target, 0.0f);
  if (samples.size() <= target) {
    std::copy(samples.begin(), samples.end(), out.begin());
  } else {
    const std::size_t start = (samples.size() - target) / 2;
    std::copy_n(samples.begin() + start, target, out.begin());
  }
  return out;
}

AudioClip load_clip(const std::filesystem::path& file, std::string word,
                    std::string speaker_id, std::string source_path) {
  auto wav = read_wav_file(file);
  if (wav.sample_rate != kSampleRate) {
    throw WavError(WavErrorKind::kUnsupportedFormat,
                   file.string() + ": sample rate " +
                       std::to_string(wav.sample_rate) + " Hz, expected 16000");
  }
  if (wav.samples.empty()) {
    throw WavError(WavErrorKind::kTruncatedData, file.string() + ": no samples");
  }
  AudioClip clip;
  clip.samples = normalize_length(wav.samples);
  clip.word = std::move(word);
  clip.speaker_id = std::move(speaker_id);
  clip.source_path = std::move(source_path);
  return clip;
}

}  // namespace xc1d
