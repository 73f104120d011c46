#include "gradcheck.hpp"

#include <cmath>

#include "toy.hpp"
#include "xc1d/layers.hpp"

namespace xc1d::toy {

namespace {

constexpr double kStep = 1e-4;

// Biases directly followed by instance norm: the normalisation removes any
// per-channel constant, so their exact gradient is zero and a relative
// error only measures rounding noise.
bool cancelled_by_norm(const std::string& name) {
  auto ends_with = [&](const std::string& suffix) {
    return name.size() >= suffix.size() &&
           name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  return ends_with(".conv.bias") || ends_with(".sep1.bias") || ends_with(".sep2.bias");
}

}  // namespace

std::optional<ModelGradReport> model_grad_check(std::uint64_t seed) {
  const auto config = grad_check_config(3);
  const auto params = build_model<double>(config, seed);
  Rng rng(derive_seed(seed, 0x6C));
  std::vector<double> xv(2 * config.input_length);
  for (auto& v : xv) v = rng.uniform(-1, 1);
  const Tensor<double> x({2, 1, config.input_length}, xv);
  const std::vector<std::size_t> labels{seed % 3, (seed + 1) % 3};

  auto loss = [&](const ModelParams<double>& p, const Tensor<double>& in,
                  std::vector<Tensor<double>>* trace = nullptr) {
    Rng unused(0);
    return layers::softmax_cross_entropy(forward(p, config, in, Mode::kEval, unused, trace),
                                         labels);
  };

  ModelGradReport report;
  std::vector<Tensor<double>> base_trace;
  loss(params, x, &base_trace);
  report.relu_margin = INFINITY;
  for (const auto& t : base_trace) {
    // Exact zeros come from an upstream relu, whose own input is checked.
    for (double v : t.data()) {
      if (v != 0.0) report.relu_margin = std::min(report.relu_margin, std::abs(v));
    }
  }
  // A coordinate is safe when moving it by +-10h flips no relu input.
  auto flips = [&](const ModelParams<double>& p, const Tensor<double>& in) {
    std::vector<Tensor<double>> trace;
    loss(p, in, &trace);
    for (std::size_t k = 0; k < trace.size(); ++k) {
      const auto a = base_trace[k].data(), b = trace[k].data();
      for (std::size_t i = 0; i < a.size(); ++i) {
        if ((a[i] > 0) != (b[i] > 0)) return true;
      }
    }
    return false;
  };
  auto nudged = [](const Tensor<double>& t, std::size_t i, double delta) {
    std::vector<double> v(t.data().begin(), t.data().end());
    v[i] += delta;
    return Tensor<double>(t.shape(), std::move(v));
  };
  for (double d : {10 * kStep, -10 * kStep}) {
    for (std::size_t i = 0; i < x.numel(); ++i) {
      if (flips(params, nudged(x, i, d))) return std::nullopt;
    }
    for (const auto& np : params) {
      for (std::size_t i = 0; i < np.value.numel(); ++i) {
        auto q = params;
        q.at(np.name) = nudged(np.value, i, d);
        if (flips(q, x)) return std::nullopt;
      }
    }
  }

  auto track = [&](double err, const std::string& name) {
    if (err > report.max_relative) {
      report.max_relative = err;
      report.worst = name;
    }
  };
  auto xg = x.clone();
  xg.set_requires_grad(true);
  track(grad_check([&](const Tensor<double>& v) { return loss(params, v); }, xg, kStep), "input");

  for (const auto& np : params) {
    auto with = [&](const Tensor<double>& v) {
      auto q = params;
      q.at(np.name) = v;
      return loss(q, x);
    };
    if (!cancelled_by_norm(np.name)) {
      track(grad_check(with, np.value, kStep), np.name);
      continue;
    }
    auto probe = np.value.clone();
    probe.zero_grad();
    with(probe).backward();
    for (double g : probe.grad()) report.max_structural = std::max(report.max_structural, std::abs(g));
    const auto base = np.value.data();
    for (std::size_t i = 0; i < base.size(); ++i) {
      std::vector<double> up(base.begin(), base.end()), down = up;
      up[i] += kStep;
      down[i] -= kStep;
      const double numeric = (with(Tensor<double>(np.value.shape(), up)).item() -
                              with(Tensor<double>(np.value.shape(), down)).item()) /
                             (2 * kStep);
      report.max_structural = std::max(report.max_structural, std::abs(numeric));
    }
  }
  return report;
}

}  // namespace xc1d::toy
