#pragma once

#include <cstdint>
#include <span>

#include "xc1d/rng.hpp"
#include "xc1d/tensor.hpp"

namespace xc1d {

enum class Mode { kTrain, kEval };

/// Weight [out, in, k] with odd k, bias [out]. "Same" zero padding: the
/// output has ceil(L / stride) steps and step o is centred on input o*stride.
template <typename T>
struct Conv1dParams {
  Tensor<T> weight;
  Tensor<T> bias;
  std::size_t stride = 1;
};

/// Depthwise weight [C, 1, S] (one filter per channel), pointwise weight
/// [N, C, 1], bias [N].
template <typename T>
struct SeparableConv1dParams {
  Tensor<T> depthwise;
  Tensor<T> pointwise;
  Tensor<T> bias;
};

template <typename T>
struct InstanceNorm1dParams {
  Tensor<T> gamma;
  Tensor<T> beta;
  double epsilon = 1e-5;
};

inline constexpr std::size_t conv_output_length(std::size_t length,
                                                std::size_t stride) {
  return (length + stride - 1) / stride;
}

namespace layers {

/// Cross-correlation of x [B, C_in, L] with p.weight; returns [B, N, ceil(L/s)].
template <typename T>
Tensor<T> conv1d(const Tensor<T>& x, const Conv1dParams<T>& p);

/// One filter per channel, stride 1, same zero padding, no bias.
template <typename T>
Tensor<T> depthwise_conv1d(const Tensor<T>& x, const Tensor<T>& weight);

template <typename T>
Tensor<T> separable_conv1d(const Tensor<T>& x,
                           const SeparableConv1dParams<T>& p);

/// Per-(item, channel) normalisation over time with the biased variance.
template <typename T>
Tensor<T> instance_norm1d(const Tensor<T>& x, const InstanceNorm1dParams<T>& p);

/// [B, C, L] -> [B, C]
template <typename T>
Tensor<T> global_avg_pool1d(const Tensor<T>& x);

/// x [B, F] . weight [F, K] + bias [K]
template <typename T>
Tensor<T> dense(const Tensor<T>& x, const Tensor<T>& weight,
                const Tensor<T>& bias);

/// Inverted dropout. Identity in eval mode or when p == 0.
template <typename T>
Tensor<T> dropout(const Tensor<T>& x, double p, Mode mode, Rng& rng);

/// Mean over the batch of -log softmax(logits)[label]; shape [1].
template <typename T>
Tensor<T> softmax_cross_entropy(const Tensor<T>& logits,
                                std::span<const std::size_t> labels);

/// Row-wise softmax of [B, K] logits (no gradient).
template <typename T>
std::vector<T> softmax(const Tensor<T>& logits);

}  // namespace layers

/// Multiply-accumulate cost of a regular vs. depthwise separable convolution
/// over L output steps.
struct OpCount {
  std::uint64_t regular = 0;
  std::uint64_t separable = 0;
  double ratio = 0.0;
};

OpCount opcount(std::uint64_t length, std::uint64_t kernel,
                std::uint64_t in_channels, std::uint64_t out_channels);

/// Running total of multiply-accumulates executed by the convolution kernels
/// (forward passes only). Shared across threads.
std::uint64_t mac_counter();
void reset_mac_counter();

}  // namespace xc1d
