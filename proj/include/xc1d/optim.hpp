#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "xc1d/model.hpp"

namespace xc1d {

/// Adam moments and hyperparameters. m and v mirror the parameter list.
template <typename T>
struct AdamState {
  std::vector<std::vector<T>> m;
  std::vector<std::vector<T>> v;
  std::uint64_t t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double lr = 1e-4;
  double weight_decay = 1e-3;

  static AdamState init(const ModelParams<T>& params, double lr,
                        double weight_decay);
};

/// One Adam step with decoupled weight decay:
///   theta -= lr * m_hat / (sqrt(v_hat) + eps) + lr * weight_decay * theta
/// Throws NumericError (naming the parameter) on a non-finite gradient,
/// before any parameter is modified.
template <typename T>
void adam_step(ModelParams<T>& params, std::span<const std::vector<T>> grads,
               AdamState<T>& state);

/// Same, reading the gradients accumulated on the parameter tensors. A
/// parameter without a gradient is treated as having a zero gradient.
template <typename T>
void adam_step(ModelParams<T>& params, AdamState<T>& state);

/// Reduce-on-plateau for a metric where higher is better.
struct PlateauSchedule {
  double lr = 1e-4;
  double factor = 0.5;
  std::size_t patience = 4;
  double best = -std::numeric_limits<double>::infinity();
  std::size_t epochs_since_improvement = 0;
};

/// Records one epoch's dev accuracy and returns the (possibly reduced)
/// learning rate. Improvement is strict.
double plateau_update(PlateauSchedule& schedule, double dev_metric);

}  // namespace xc1d
