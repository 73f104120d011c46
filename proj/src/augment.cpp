#include "xc1d/augment.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "xc1d/parallel.hpp"

namespace xc1d {
namespace {

constexpr std::size_t kFrame = 400;  // 25 ms
constexpr std::size_t kHop = kFrame / 2;
constexpr std::size_t kTolerance = kHop / 2;

float clamp_sample(double x) {
  return static_cast<float>(std::clamp(x, -1.0, static_cast<double>(kMaxSample)));
}

// Triangular window that is positive everywhere and sums to exactly 1 under
// a 50% overlap.
const std::vector<double>& triangle() {
  static const std::vector<double> w = [] {
    std::vector<double> v(kFrame);
    const double half = kFrame / 2.0;
    for (std::size_t n = 0; n < kFrame; ++n) {
      v[n] = 1.0 - std::abs((n + 0.5) - half) / half;
    }
    return v;
  }();
  return w;
}

}  // namespace

void AugmentConfig::validate() const {
  auto check = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("augment config: ") + what);
  };
  check(resample_min > 0 && resample_min <= resample_max,
        "resample range must be a positive interval");
  check(gain_min > 0 && gain_min <= gain_max, "gain range must be a positive interval");
  check(offset_min <= offset_max, "offset range must be an interval");
  check(noise_sigma_min >= 0 && noise_sigma_min <= noise_sigma_max,
        "noise sigma range must be a non-negative interval");
  check(pitch_min <= pitch_max && pitch_min >= -12 && pitch_max <= 12,
        "pitch range must lie within [-12, 12] semitones");
}

std::vector<float> resample(std::span<const float> samples, double factor) {
  if (!(factor > 0)) throw ConfigError("resample: factor must be positive");
  const std::size_t n = samples.size();
  const auto out_len = static_cast<std::size_t>(
      std::max(1.0, std::round(static_cast<double>(n) / factor)));
  auto at = [&](std::size_t i) -> double { return i < n ? samples[i] : 0.0; };
  std::vector<float> out(out_len);
  for (std::size_t i = 0; i < out_len; ++i) {
    const double pos = static_cast<double>(i) * factor;
    const auto i0 = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i0);
    const double x0 = at(i0);
    out[i] = static_cast<float>(x0 + frac * (at(i0 + 1) - x0));
  }
  return out;
}

std::vector<float> saturate(std::span<const float> samples, double gain) {
  if (!(gain > 0)) throw ConfigError("saturate: gain must be positive");
  std::vector<float> out(samples.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = clamp_sample(gain * samples[i]);
  return out;
}

std::vector<float> time_offset(std::span<const float> samples, std::int64_t k) {
  const auto n = static_cast<std::int64_t>(samples.size());
  if (k >= n || -k >= n) {
    throw ConfigError("time_offset: |" + std::to_string(k) +
                      "| must be below the clip length " + std::to_string(n));
  }
  std::vector<float> out(samples.size(), 0.0f);
  for (std::int64_t i = 0; i < n; ++i) {
    const std::int64_t src = i - k;
    if (src >= 0 && src < n) out[i] = samples[src];
  }
  return out;
}

std::vector<float> add_white_noise(std::span<const float> samples, double sigma,
                                   Rng& rng) {
  if (!(sigma >= 0)) throw ConfigError("add_white_noise: sigma must be >= 0");
  std::vector<float> out(samples.begin(), samples.end());
  if (sigma == 0) return out;
  for (auto& x : out) x = clamp_sample(x + sigma * rng.normal());
  return out;
}

std::vector<float> time_stretch(std::span<const float> samples,
                                std::size_t target) {
  if (samples.empty() || target == 0) {
    throw ConfigError("time_stretch: empty input or target");
  }
  if (samples.size() == target) return {samples.begin(), samples.end()};

  const auto n = static_cast<std::int64_t>(samples.size());
  auto at = [&](std::int64_t i) -> double {
    return i >= 0 && i < n ? samples[i] : 0.0;
  };
  const auto& window = triangle();
  const double analysis_hop =
      static_cast<double>(kHop) * static_cast<double>(samples.size()) /
      static_cast<double>(target);
  const std::size_t overlap = kFrame - kHop;

  std::vector<double> acc(target + kFrame, 0.0);
  std::vector<double> weight(target + kFrame, 0.0);
  std::int64_t previous = 0;
  for (std::size_t j = 0; j * kHop < target; ++j) {
    std::int64_t start = 0;
    if (j > 0) {
      const auto nominal =
          static_cast<std::int64_t>(std::llround(static_cast<double>(j) * analysis_hop));
      const std::int64_t natural = previous + static_cast<std::int64_t>(kHop);
      const auto tol = static_cast<std::int64_t>(kTolerance);
      double best_score = -1e300;
      start = std::max<std::int64_t>(0, nominal);
      for (std::int64_t d = -tol; d <= tol; ++d) {
        const std::int64_t cand = nominal + d;
        if (cand < 0) continue;
        double corr = 0.0, energy = 0.0;
        for (std::size_t k = 0; k < overlap; ++k) {
          const double c = at(cand + static_cast<std::int64_t>(k));
          corr += c * at(natural + static_cast<std::int64_t>(k));
          energy += c * c;
        }
        const double score = energy > 0 ? corr / std::sqrt(energy) : 0.0;
        const bool closer = std::llabs(cand - nominal) < std::llabs(start - nominal);
        if (score > best_score || (score == best_score && closer)) {
          best_score = score;
          start = cand;
        }
      }
    }
    const std::size_t base = j * kHop;
    for (std::size_t k = 0; k < kFrame; ++k) {
      acc[base + k] += window[k] * at(start + static_cast<std::int64_t>(k));
      weight[base + k] += window[k];
    }
    previous = start;
  }
  std::vector<float> out(target);
  for (std::size_t i = 0; i < target; ++i) {
    out[i] = weight[i] > 1e-12 ? static_cast<float>(acc[i] / weight[i]) : 0.0f;
  }
  return out;
}

std::vector<float> pitch_shift(std::span<const float> samples, double semitones) {
  if (!(semitones >= -12 && semitones <= 12)) {
    throw ConfigError("pitch_shift: semitones must be in [-12, 12]");
  }
  if (samples.empty()) return {};
  const double factor = std::exp2(semitones / 12.0);
  const auto shifted = resample(samples, factor);
  return time_stretch(shifted, samples.size());
}

Rng augment_rng(std::uint64_t seed, const std::string& source_path,
                std::uint32_t copy_index) {
  return Rng(derive_seed(seed, fnv1a64(source_path) ^ mix64(copy_index)));
}

AugmentParams draw_augment_params(const AugmentConfig& c, Rng& rng) {
  AugmentParams p;
  p.resample_factor = rng.uniform(c.resample_min, c.resample_max);
  p.semitones = rng.uniform(c.pitch_min, c.pitch_max);
  p.offset = rng.uniform_int(c.offset_min, c.offset_max);
  p.gain = rng.uniform(c.gain_min, c.gain_max);
  p.noise_sigma = rng.uniform(c.noise_sigma_min, c.noise_sigma_max);
  return p;
}

AudioClip augment_clip(const AudioClip& clip, const AugmentConfig& config,
                       std::uint64_t seed, std::uint32_t copy_index) {
  if (copy_index == 0) throw ConfigError("augment_clip: copy index must be >= 1");
  config.validate();
  if (clip.samples.empty()) throw DataError("augment_clip: empty clip " + clip.source_path);
  Rng rng = augment_rng(seed, clip.source_path, copy_index);
  const AugmentParams p = draw_augment_params(config, rng);

  auto x = resample(clip.samples, p.resample_factor);
  x = pitch_shift(x, p.semitones);
  const auto limit = static_cast<std::int64_t>(x.size()) - 1;
  x = time_offset(x, std::clamp(p.offset, -limit, limit));
  x = saturate(x, p.gain);
  x = add_white_noise(x, p.noise_sigma, rng);

  AudioClip out;
  out.samples = normalize_length(x);
  out.sample_rate = clip.sample_rate;
  out.word = clip.word;
  out.speaker_id = clip.speaker_id;
  out.source_path = clip.source_path;
  out.augmentation = copy_index;
  return out;
}

std::vector<AudioClip> expand_training_set(const std::vector<AudioClip>& clips,
                                           const AugmentConfig& config,
                                           std::uint64_t seed) {
  if (clips.empty()) throw DataError("expand_training_set: no clips");
  config.validate();
  const std::size_t copies = config.copies;
  std::vector<AudioClip> out(clips.size() * (1 + copies));
  std::copy(clips.begin(), clips.end(), out.begin());
  parallel_for(clips.size(), [&](std::size_t i) {
    for (std::size_t c = 1; c <= copies; ++c) {
      out[clips.size() + i * copies + (c - 1)] =
          augment_clip(clips[i], config, seed, static_cast<std::uint32_t>(c));
    }
  });
  return out;
}

}  // namespace xc1d
