#include "xc1d/optim.hpp"

#include <cmath>
#include <string>

namespace xc1d {

template <typename T>
AdamState<T> AdamState<T>::init(const ModelParams<T>& params, double lr,
                                double weight_decay) {
  AdamState s;
  s.lr = lr;
  s.weight_decay = weight_decay;
  for (const auto& p : params) {
    s.m.emplace_back(p.value.numel(), T(0));
    s.v.emplace_back(p.value.numel(), T(0));
  }
  return s;
}

template <typename T>
void adam_step(ModelParams<T>& params, std::span<const std::vector<T>> grads,
               AdamState<T>& state) {
  if (grads.size() != params.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw ShapeError("adam_step: " + std::to_string(params.size()) +
                     " parameters but " + std::to_string(grads.size()) +
                     " gradients and " + std::to_string(state.m.size()) +
                     " moment buffers");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& name = params[i].name;
    if (grads[i].size() != params[i].value.numel() ||
        state.m[i].size() != grads[i].size()) {
      throw ShapeError("adam_step: gradient size mismatch for '" + name + "'");
    }
    for (T g : grads[i]) {
      if (!std::isfinite(g)) {
        throw NumericError("adam_step: non-finite gradient in '" + name + "'");
      }
    }
  }

  state.t += 1;
  const double b1 = state.beta1, b2 = state.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
  const double lr = state.lr;
  const double decay = state.lr * state.weight_decay;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto theta = params[i].value.mutable_data();
    auto& m = state.m[i];
    auto& v = state.v[i];
    const auto& g = grads[i];
    for (std::size_t k = 0; k < theta.size(); ++k) {
      const double gk = g[k];
      const double mk = b1 * m[k] + (1.0 - b1) * gk;
      const double vk = b2 * v[k] + (1.0 - b2) * gk * gk;
      m[k] = static_cast<T>(mk);
      v[k] = static_cast<T>(vk);
      const double m_hat = mk / c1;
      const double v_hat = vk / c2;
      const double th = theta[k];
      theta[k] = static_cast<T>(th - lr * m_hat / (std::sqrt(v_hat) + state.eps) -
                                decay * th);
    }
  }
}

template <typename T>
void adam_step(ModelParams<T>& params, AdamState<T>& state) {
  std::vector<std::vector<T>> grads;
  grads.reserve(params.size());
  for (const auto& p : params) {
    if (p.value.has_grad()) {
      const auto g = p.value.grad();
      grads.emplace_back(g.begin(), g.end());
    } else {
      grads.emplace_back(p.value.numel(), T(0));
    }
  }
  adam_step<T>(params, grads, state);
}

double plateau_update(PlateauSchedule& s, double dev_metric) {
  if (!(dev_metric >= 0.0 && dev_metric <= 1.0)) {
    throw ConfigError("plateau_update: metric must be in [0, 1], got " +
                      std::to_string(dev_metric));
  }
  if (dev_metric > s.best) {
    s.best = dev_metric;
    s.epochs_since_improvement = 0;
    return s.lr;
  }
  s.epochs_since_improvement += 1;
  if (s.epochs_since_improvement >= s.patience) {
    s.lr *= s.factor;
    s.epochs_since_improvement = 0;
  }
  return s.lr;
}

template struct AdamState<float>;
template struct AdamState<double>;
template void adam_step(ModelParams<float>&, std::span<const std::vector<float>>,
                        AdamState<float>&);
template void adam_step(ModelParams<double>&,
                        std::span<const std::vector<double>>, AdamState<double>&);
template void adam_step(ModelParams<float>&, AdamState<float>&);
template void adam_step(ModelParams<double>&, AdamState<double>&);

}  // namespace xc1d
