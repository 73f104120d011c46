#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "xc1d/layers.hpp"
#include "xc1d/rng.hpp"
#include "xc1d/tensor.hpp"

namespace xc1d {

/// One strided convolution of the entry module.
struct EntryStage {
  std::size_t channels = 0;
  std::size_t stride = 1;
  std::size_t kernel = 1;

  bool operator==(const EntryStage&) const = default;
};

/// Architecture hyperparameters. Defaults give the reference network:
/// four entry stages (16, 32, 64, 128 channels, kernel 9, stride 4) taking
/// 16000 samples to 63 steps, eight middle blocks of width 128 with
/// depthwise kernel 9, then pooling, dropout 0.75 and a dense head.
struct ModelConfig {
  std::size_t n_classes = 35;
  std::size_t input_length = 16000;
  std::vector<EntryStage> entry = {
      {16, 4, 9}, {32, 4, 9}, {64, 4, 9}, {128, 4, 9}};
  std::size_t n_mod = 8;
  std::size_t block_channels = 128;
  std::size_t block_kernel = 9;
  double dropout = 0.75;
  bool residual = true;

  bool operator==(const ModelConfig&) const = default;

  /// Throws ConfigError listing every violated constraint.
  void validate() const;

  /// "key=value" lines; parse(to_text()) == *this.
  std::string to_text() const;
  static ModelConfig parse(const std::string& text);
};

template <typename T>
struct NamedParam {
  std::string name;
  Tensor<T> value;
};

/// Ordered, uniquely named parameters. Order is the serialization order.
template <typename T>
class ModelParams {
 public:
  ModelParams() = default;

  void add(std::string name, Tensor<T> value);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t scalar_count() const;

  const Tensor<T>& at(const std::string& name) const;
  Tensor<T>& at(const std::string& name);
  bool contains(const std::string& name) const { return index_.count(name) > 0; }

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  NamedParam<T>& operator[](std::size_t i) { return entries_[i]; }
  const NamedParam<T>& operator[](std::size_t i) const { return entries_[i]; }

  void zero_grad();

  /// Deep copy; requires_grad preserved.
  ModelParams clone() const;

  template <typename U>
  ModelParams<U> cast() const {
    ModelParams<U> out;
    for (const auto& p : entries_) out.add(p.name, p.value.template cast<U>());
    return out;
  }

 private:
  std::vector<NamedParam<T>> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct LayerCount {
  std::string name;
  std::size_t count = 0;
};

/// Exact scalar parameter count with a per-tensor breakdown, in the order
/// build() creates parameters.
std::vector<LayerCount> param_breakdown(const ModelConfig& config);
std::size_t param_count(const ModelConfig& config);

/// Fan-in scaled uniform weights (bound 1/sqrt(fan_in)), zero biases,
/// gamma = 1, beta = 0. Deterministic in the seed.
template <typename T>
ModelParams<T> build_model(const ModelConfig& config, std::uint64_t seed);

/// x [batch, 1, input_length] -> logits [batch, n_classes]. `rng` drives
/// dropout and is only consulted in train mode. When relu_inputs is given,
/// every tensor entering a relu is appended to it.
template <typename T>
Tensor<T> forward(const ModelParams<T>& params, const ModelConfig& config,
                  const Tensor<T>& x, Mode mode, Rng& rng,
                  std::vector<Tensor<T>>* relu_inputs = nullptr);

extern template class ModelParams<float>;
extern template class ModelParams<double>;

}  // namespace xc1d
