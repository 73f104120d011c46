#include "toy.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <unistd.h>

namespace xc1d::toy {

namespace fs = std::filesystem;

std::vector<float> tone(double freq_hz, double amplitude, double phase, double noise_sigma,
                        Rng& rng, std::size_t length) {
  std::vector<float> out(length);
  for (std::size_t i = 0; i < length; ++i) {
    const double t = static_cast<double>(i) / kSampleRate;
    double v = amplitude * std::sin(2 * std::numbers::pi * freq_hz * t + phase);
    v += noise_sigma * rng.normal();
    out[i] = static_cast<float>(std::clamp(v, -1.0, 1.0 - 1.0 / 32768));
  }
  return out;
}

ClipSet sine_pair_set(std::size_t per_class, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<AudioClip> clips;
  std::vector<std::size_t> labels;
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    const std::size_t label = i % 2;
    AudioClip c;
    c.samples = tone(label == 0 ? 440.0 : 880.0, rng.uniform(0.3, 0.8),
                     rng.uniform(0, 2 * std::numbers::pi), 0.01, rng);
    c.word = label == 0 ? "left" : "right";
    c.speaker_id = "synth" + std::to_string(i);
    c.source_path = "synthetic/" + std::to_string(i) + ".wav";
    clips.push_back(std::move(c));
    labels.push_back(label);
  }
  return ClipSet::from_clips(std::move(clips), std::move(labels));
}

ModelConfig toy_config(std::size_t n_classes) {
  ModelConfig c;
  c.n_classes = n_classes;
  c.input_length = kClipSamples;
  c.entry = {{8, 4, 9}, {16, 4, 9}, {16, 4, 9}, {16, 4, 9}};
  c.n_mod = 1;
  c.block_channels = 16;
  c.block_kernel = 9;
  c.dropout = 0.0;
  c.residual = true;
  return c;
}

ModelConfig grad_check_config(std::size_t n_classes) {
  ModelConfig c;
  c.n_classes = n_classes;
  c.input_length = 64;
  c.entry = {{3, 2, 3}, {4, 2, 3}};
  c.n_mod = 2;
  c.block_channels = 5;
  c.block_kernel = 3;
  c.dropout = 0.0;
  c.residual = true;
  return c;
}

std::size_t write_toy_corpus(const fs::path& root, const ToyCorpusSpec& spec) {
  fs::create_directories(root);
  Rng rng(spec.seed);
  std::ofstream dev(root / "validation_list.txt"), test(root / "testing_list.txt");
  std::size_t files = 0;
  for (std::size_t w = 0; w < spec.words.size(); ++w) {
    const auto& word = spec.words[w];
    fs::create_directories(root / word);
    const double base = 300.0 + 250.0 * static_cast<double>(w);
    for (std::size_t s = 0; s < spec.speakers; ++s) {
      char speaker[16];
      std::snprintf(speaker, sizeof speaker, "%08x", static_cast<unsigned>(0x1000 + 17 * s));
      for (std::size_t k = 0; k < spec.clips_per_speaker; ++k) {
        const std::string name =
            std::string(speaker) + "_nohash_" + std::to_string(k) + ".wav";
        const auto samples = tone(base * rng.uniform(0.97, 1.03), rng.uniform(0.3, 0.7),
                                  rng.uniform(0, 2 * std::numbers::pi), 0.01, rng);
        write_wav(samples, root / word / name);
        ++files;
        const std::string rel = word + "/" + name;
        if (s + 2 == spec.speakers) dev << rel << '\n';
        if (s + 1 == spec.speakers) test << rel << '\n';
      }
    }
  }
  return files;
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("xc1d-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::vector<std::uint8_t> read_bytes(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t dominant_bin(const std::vector<float>& samples, std::size_t max_bin) {
  const std::size_t n = samples.size();
  std::size_t best = 1;
  double best_mag = -1.0;
  std::vector<double> c(n), sn(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(n);
    c[t] = std::cos(a);
    sn[t] = std::sin(a);
  }
  for (std::size_t k = 1; k <= max_bin; ++k) {
    double re = 0.0, im = 0.0;
    for (std::size_t t = 0, idx = 0; t < n; ++t, idx = (idx + k) % n) {
      re += samples[t] * c[idx];
      im -= samples[t] * sn[idx];
    }
    const double mag = re * re + im * im;
    if (mag > best_mag) {
      best_mag = mag;
      best = k;
    }
  }
  return best;
}

}  // namespace xc1d::toy
