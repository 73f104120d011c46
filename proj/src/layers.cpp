#include "xc1d/layers.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "op_builder.hpp"
#include "xc1d/ops.hpp"
#include "xc1d/parallel.hpp"

namespace xc1d {
namespace {

std::atomic<std::uint64_t> g_macs{0};

using detail::grad_target;
using detail::make_result;
using detail::Node;

[[noreturn]] void shape_fail(const char* op, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(op) + ": shape mismatch " + shape_to_string(a) +
                   " vs " + shape_to_string(b));
}

// Zero-padded copy of x [B, C, L]: row (b, c) has `padded` entries with the
// signal starting at offset `left`. Samples beyond `padded` are never read.
template <typename T>
std::vector<T> pad_rows(std::span<const T> x, std::size_t rows,
                        std::size_t length, std::size_t left,
                        std::size_t padded) {
  std::vector<T> out(rows * padded, T(0));
  const std::size_t copy = std::min(length, padded - left);
  parallel_for(rows, [&](std::size_t r) {
    std::copy_n(x.begin() + r * length, copy, out.begin() + r * padded + left);
  });
  return out;
}

struct ConvGeometry {
  std::size_t batch, in_ch, length, out_ch, kernel, stride, out_len, left,
      padded;
};

}  // namespace

std::uint64_t mac_counter() { return g_macs.load(); }
void reset_mac_counter() { g_macs.store(0); }

OpCount opcount(std::uint64_t length, std::uint64_t kernel,
                std::uint64_t in_channels, std::uint64_t out_channels) {
  if (length == 0 || kernel == 0 || in_channels == 0 || out_channels == 0) {
    throw ConfigError("opcount: all arguments must be positive");
  }
  OpCount c;
  c.regular = length * kernel * in_channels * out_channels;
  c.separable = length * kernel * in_channels + length * in_channels * out_channels;
  c.ratio = static_cast<double>(c.separable) / static_cast<double>(c.regular);
  return c;
}

namespace layers {

template <typename T>
Tensor<T> conv1d(const Tensor<T>& x, const Conv1dParams<T>& p) {
  const Shape& xs = x.shape();
  const Shape& ws = p.weight.shape();
  if (xs.size() != 3 || ws.size() != 3 || xs[1] != ws[1]) {
    shape_fail("conv1d", xs, ws);
  }
  if (ws[2] % 2 == 0) {
    throw ShapeError("conv1d: kernel size must be odd, got weight " +
                     shape_to_string(ws));
  }
  if (p.bias.shape() != Shape{ws[0]}) shape_fail("conv1d", ws, p.bias.shape());
  if (p.stride == 0) throw ConfigError("conv1d: stride must be positive");

  ConvGeometry g{};
  g.batch = xs[0];
  g.in_ch = xs[1];
  g.length = xs[2];
  g.out_ch = ws[0];
  g.kernel = ws[2];
  g.stride = p.stride;
  g.out_len = conv_output_length(g.length, g.stride);
  g.left = g.kernel / 2;
  g.padded = (g.out_len - 1) * g.stride + g.kernel;

  auto xpad = std::make_shared<std::vector<T>>(
      pad_rows(x.data(), g.batch * g.in_ch, g.length, g.left, g.padded));
  const auto w = p.weight.data();
  const auto bias = p.bias.data();
  std::vector<T> out(g.batch * g.out_ch * g.out_len);
  std::atomic<std::uint64_t> macs{0};

  parallel_for(g.batch, [&](std::size_t b) {
    std::uint64_t local = 0;
    for (std::size_t co = 0; co < g.out_ch; ++co) {
      T* y = out.data() + (b * g.out_ch + co) * g.out_len;
      std::fill_n(y, g.out_len, bias[co]);
      for (std::size_t ci = 0; ci < g.in_ch; ++ci) {
        const T* xr = xpad->data() + (b * g.in_ch + ci) * g.padded;
        const T* wr = w.data() + (co * g.in_ch + ci) * g.kernel;
        for (std::size_t k = 0; k < g.kernel; ++k) {
          const T wv = wr[k];
          const T* src = xr + k;
          for (std::size_t o = 0; o < g.out_len; ++o) {
            y[o] += wv * src[o * g.stride];
          }
          local += g.out_len;
        }
      }
    }
    macs += local;
  });
  g_macs += macs.load();

  return make_result(
      "conv1d", Shape{g.batch, g.out_ch, g.out_len}, std::move(out),
      {&x, &p.weight, &p.bias}, [g, xpad](Node<T>& self) {
        const auto& grad = self.grad;
        const auto& w = self.inputs[1]->data;
        if (auto* gx = grad_target(self, 0)) {
          parallel_for(g.batch, [&](std::size_t b) {
            std::vector<T> dpad(g.in_ch * g.padded, T(0));
            for (std::size_t co = 0; co < g.out_ch; ++co) {
              const T* gy = grad.data() + (b * g.out_ch + co) * g.out_len;
              for (std::size_t ci = 0; ci < g.in_ch; ++ci) {
                T* dr = dpad.data() + ci * g.padded;
                const T* wr = w.data() + (co * g.in_ch + ci) * g.kernel;
                for (std::size_t k = 0; k < g.kernel; ++k) {
                  const T wv = wr[k];
                  T* dst = dr + k;
                  for (std::size_t o = 0; o < g.out_len; ++o) {
                    dst[o * g.stride] += wv * gy[o];
                  }
                }
              }
            }
            const std::size_t copy = std::min(g.length, g.padded - g.left);
            for (std::size_t ci = 0; ci < g.in_ch; ++ci) {
              T* dx = gx->data() + (b * g.in_ch + ci) * g.length;
              const T* dr = dpad.data() + ci * g.padded + g.left;
              for (std::size_t t = 0; t < copy; ++t) dx[t] += dr[t];
            }
          });
        }
        auto* gw = grad_target(self, 1);
        auto* gb = grad_target(self, 2);
        if (gw || gb) {
          parallel_for(g.out_ch, [&](std::size_t co) {
            for (std::size_t b = 0; b < g.batch; ++b) {
              const T* gy = grad.data() + (b * g.out_ch + co) * g.out_len;
              if (gb) {
                T acc = T(0);
                for (std::size_t o = 0; o < g.out_len; ++o) acc += gy[o];
                (*gb)[co] += acc;
              }
              if (!gw) continue;
              for (std::size_t ci = 0; ci < g.in_ch; ++ci) {
                const T* xr = xpad->data() + (b * g.in_ch + ci) * g.padded;
                T* dw = gw->data() + (co * g.in_ch + ci) * g.kernel;
                for (std::size_t k = 0; k < g.kernel; ++k) {
                  const T* src = xr + k;
                  T acc = T(0);
                  for (std::size_t o = 0; o < g.out_len; ++o) {
                    acc += gy[o] * src[o * g.stride];
                  }
                  dw[k] += acc;
                }
              }
            }
          });
        }
      });
}

template <typename T>
Tensor<T> depthwise_conv1d(const Tensor<T>& x, const Tensor<T>& weight) {
  const Shape& xs = x.shape();
  const Shape& ws = weight.shape();
  if (xs.size() != 3 || ws.size() != 3 || ws[0] != xs[1] || ws[1] != 1) {
    shape_fail("depthwise_conv1d", xs, ws);
  }
  if (ws[2] % 2 == 0) {
    throw ShapeError("depthwise_conv1d: kernel size must be odd, got weight " +
                     shape_to_string(ws));
  }
  const std::size_t batch = xs[0], ch = xs[1], length = xs[2], kernel = ws[2];
  const std::size_t left = kernel / 2;
  const std::size_t padded = length + kernel - 1;
  const std::size_t rows = batch * ch;
  auto xpad = std::make_shared<std::vector<T>>(
      pad_rows(x.data(), rows, length, left, padded));
  const auto w = weight.data();
  std::vector<T> out(rows * length, T(0));
  parallel_for(rows, [&](std::size_t r) {
    const std::size_t c = r % ch;
    const T* xr = xpad->data() + r * padded;
    T* y = out.data() + r * length;
    for (std::size_t k = 0; k < kernel; ++k) {
      const T wv = w[c * kernel + k];
      for (std::size_t o = 0; o < length; ++o) y[o] += wv * xr[o + k];
    }
  });
  g_macs += static_cast<std::uint64_t>(rows) * kernel * length;

  return make_result(
      "depthwise_conv1d", xs, std::move(out), {&x, &weight},
      [batch, ch, length, kernel, left, padded, xpad](Node<T>& self) {
        const auto& grad = self.grad;
        const auto& w = self.inputs[1]->data;
        if (auto* gx = grad_target(self, 0)) {
          parallel_for(batch * ch, [&](std::size_t r) {
            const std::size_t c = r % ch;
            const T* gy = grad.data() + r * length;
            T* dx = gx->data() + r * length;
            // dx[t] = sum_k w[k] * gy[t + left - k], restricted to valid o.
            for (std::size_t k = 0; k < kernel; ++k) {
              const T wv = w[c * kernel + k];
              const std::size_t lo = k > left ? k - left : 0;
              const std::size_t hi =
                  length + k >= left ? std::min(length, length + k - left) : 0;
              for (std::size_t t = lo; t < hi; ++t) {
                dx[t] += wv * gy[t + left - k];
              }
            }
          });
        }
        if (auto* gw = grad_target(self, 1)) {
          parallel_for(ch, [&](std::size_t c) {
            for (std::size_t b = 0; b < batch; ++b) {
              const std::size_t r = b * ch + c;
              const T* gy = grad.data() + r * length;
              const T* xr = xpad->data() + r * padded;
              for (std::size_t k = 0; k < kernel; ++k) {
                T acc = T(0);
                for (std::size_t o = 0; o < length; ++o) acc += gy[o] * xr[o + k];
                (*gw)[c * kernel + k] += acc;
              }
            }
          });
        }
      });
}

template <typename T>
Tensor<T> separable_conv1d(const Tensor<T>& x,
                           const SeparableConv1dParams<T>& p) {
  const Shape& ds = p.depthwise.shape();
  const Shape& ps = p.pointwise.shape();
  if (ps.size() != 3 || ds.size() != 3 || ps[1] != ds[0] || ps[2] != 1) {
    shape_fail("separable_conv1d", ds, ps);
  }
  auto depth = depthwise_conv1d(x, p.depthwise);
  return conv1d(depth, Conv1dParams<T>{p.pointwise, p.bias, 1});
}

template <typename T>
Tensor<T> instance_norm1d(const Tensor<T>& x,
                          const InstanceNorm1dParams<T>& p) {
  const Shape& xs = x.shape();
  if (xs.size() != 3) {
    throw ShapeError("instance_norm1d: expected [batch, channels, length], got " +
                     shape_to_string(xs));
  }
  const std::size_t ch = xs[1], length = xs[2], rows = xs[0] * xs[1];
  if (p.gamma.shape() != Shape{ch}) shape_fail("instance_norm1d", xs, p.gamma.shape());
  if (p.beta.shape() != Shape{ch}) shape_fail("instance_norm1d", xs, p.beta.shape());

  const auto in = x.data();
  const auto gamma = p.gamma.data();
  const auto beta = p.beta.data();
  auto xhat = std::make_shared<std::vector<T>>(in.size());
  auto inv_std = std::make_shared<std::vector<double>>(rows);
  std::vector<T> out(in.size());
  const double eps = p.epsilon;
  parallel_for(rows, [&](std::size_t r) {
    const T* xr = in.data() + r * length;
    double mean = 0.0;
    for (std::size_t t = 0; t < length; ++t) mean += xr[t];
    mean /= static_cast<double>(length);
    double var = 0.0;
    for (std::size_t t = 0; t < length; ++t) {
      const double d = xr[t] - mean;
      var += d * d;
    }
    var /= static_cast<double>(length);
    const double inv = 1.0 / std::sqrt(var + eps);
    (*inv_std)[r] = inv;
    const std::size_t c = r % ch;
    T* xh = xhat->data() + r * length;
    T* y = out.data() + r * length;
    for (std::size_t t = 0; t < length; ++t) {
      xh[t] = static_cast<T>((xr[t] - mean) * inv);
      y[t] = gamma[c] * xh[t] + beta[c];
    }
  });

  return make_result(
      "instance_norm1d", xs, std::move(out), {&x, &p.gamma, &p.beta},
      [ch, length, rows, xhat, inv_std](Node<T>& self) {
        const auto& grad = self.grad;
        const auto& gamma = self.inputs[1]->data;
        std::vector<double> gsum(rows), gxsum(rows);
        auto* gx = grad_target(self, 0);
        parallel_for(rows, [&](std::size_t r) {
          const T* gy = grad.data() + r * length;
          const T* xh = xhat->data() + r * length;
          double s = 0.0, sx = 0.0;
          for (std::size_t t = 0; t < length; ++t) {
            s += gy[t];
            sx += static_cast<double>(gy[t]) * xh[t];
          }
          gsum[r] = s;
          gxsum[r] = sx;
          if (!gx) return;
          const double n = static_cast<double>(length);
          const double k = gamma[r % ch] * (*inv_std)[r] / n;
          T* dx = gx->data() + r * length;
          for (std::size_t t = 0; t < length; ++t) {
            dx[t] += static_cast<T>(k * (n * gy[t] - s - xh[t] * sx));
          }
        });
        auto* gg = grad_target(self, 1);
        auto* gb = grad_target(self, 2);
        for (std::size_t r = 0; r < rows; ++r) {
          if (gg) (*gg)[r % ch] += static_cast<T>(gxsum[r]);
          if (gb) (*gb)[r % ch] += static_cast<T>(gsum[r]);
        }
      });
}

template <typename T>
Tensor<T> global_avg_pool1d(const Tensor<T>& x) {
  if (x.rank() != 3) {
    throw ShapeError("global_avg_pool1d: expected [batch, channels, length], got " +
                     shape_to_string(x.shape()));
  }
  return ops::reshape(ops::reduce_mean(x, 2), Shape{x.dim(0), x.dim(1)});
}

template <typename T>
Tensor<T> dense(const Tensor<T>& x, const Tensor<T>& weight,
                const Tensor<T>& bias) {
  if (x.rank() != 2 || weight.rank() != 2 || x.dim(1) != weight.dim(0)) {
    shape_fail("dense", x.shape(), weight.shape());
  }
  if (bias.shape() != Shape{weight.dim(1)}) {
    shape_fail("dense", weight.shape(), bias.shape());
  }
  const Shape out{x.dim(0), weight.dim(1)};
  return ops::add(ops::matmul(x, weight), ops::broadcast_to(bias, out));
}

template <typename T>
Tensor<T> dropout(const Tensor<T>& x, double p, Mode mode, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw ConfigError("dropout: probability must be in [0, 1), got " +
                      std::to_string(p));
  }
  if (mode == Mode::kEval || p == 0.0) return x;
  const T keep_scale = static_cast<T>(1.0 / (1.0 - p));
  std::vector<T> mask(x.numel());
  for (auto& m : mask) m = rng.uniform() < p ? T(0) : keep_scale;
  return ops::mul(x, Tensor<T>(x.shape(), std::move(mask)));
}

template <typename T>
Tensor<T> softmax_cross_entropy(const Tensor<T>& logits,
                                std::span<const std::size_t> labels) {
  if (logits.rank() != 2 || labels.size() != logits.dim(0)) {
    throw ShapeError("softmax_cross_entropy: logits " +
                     shape_to_string(logits.shape()) + " vs " +
                     std::to_string(labels.size()) + " labels");
  }
  const std::size_t batch = logits.dim(0), classes = logits.dim(1);
  for (auto l : labels) {
    if (l >= classes) {
      throw ConfigError("softmax_cross_entropy: label " + std::to_string(l) +
                        " out of range [0, " + std::to_string(classes) + ")");
    }
  }
  const auto z = logits.data();
  auto probs = std::make_shared<std::vector<double>>(batch * classes);
  double loss = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    const T* row = z.data() + b * classes;
    const double mx = *std::max_element(row, row + classes);
    double total = 0.0;
    for (std::size_t k = 0; k < classes; ++k) total += std::exp(row[k] - mx);
    const double log_total = std::log(total);
    loss += log_total - (row[labels[b]] - mx);
    for (std::size_t k = 0; k < classes; ++k) {
      (*probs)[b * classes + k] = std::exp(row[k] - mx - log_total);
    }
  }
  loss /= static_cast<double>(batch);
  std::vector<std::size_t> targets(labels.begin(), labels.end());
  return make_result(
      "softmax_cross_entropy", Shape{1}, std::vector<T>{static_cast<T>(loss)},
      {&logits},
      [batch, classes, probs, targets = std::move(targets)](Node<T>& self) {
        auto* g = grad_target(self, 0);
        if (!g) return;
        const double scale = self.grad[0] / static_cast<double>(batch);
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t k = 0; k < classes; ++k) {
            const double onehot = k == targets[b] ? 1.0 : 0.0;
            (*g)[b * classes + k] += static_cast<T>(
                scale * ((*probs)[b * classes + k] - onehot));
          }
        }
      });
}

template <typename T>
std::vector<T> softmax(const Tensor<T>& logits) {
  if (logits.rank() != 2) {
    throw ShapeError("softmax: expected [batch, classes], got " +
                     shape_to_string(logits.shape()));
  }
  const std::size_t batch = logits.dim(0), classes = logits.dim(1);
  const auto z = logits.data();
  std::vector<T> out(z.size());
  for (std::size_t b = 0; b < batch; ++b) {
    const T* row = z.data() + b * classes;
    const double mx = *std::max_element(row, row + classes);
    double total = 0.0;
    for (std::size_t k = 0; k < classes; ++k) total += std::exp(row[k] - mx);
    for (std::size_t k = 0; k < classes; ++k) {
      out[b * classes + k] = static_cast<T>(std::exp(row[k] - mx) / total);
    }
  }
  return out;
}

#define XC1D_INSTANTIATE_LAYERS(T)                                            \
  template Tensor<T> conv1d(const Tensor<T>&, const Conv1dParams<T>&);        \
  template Tensor<T> depthwise_conv1d(const Tensor<T>&, const Tensor<T>&);    \
  template Tensor<T> separable_conv1d(const Tensor<T>&,                       \
                                      const SeparableConv1dParams<T>&);       \
  template Tensor<T> instance_norm1d(const Tensor<T>&,                        \
                                     const InstanceNorm1dParams<T>&);         \
  template Tensor<T> global_avg_pool1d(const Tensor<T>&);                     \
  template Tensor<T> dense(const Tensor<T>&, const Tensor<T>&,                \
                           const Tensor<T>&);                                 \
  template Tensor<T> dropout(const Tensor<T>&, double, Mode, Rng&);           \
  template Tensor<T> softmax_cross_entropy(const Tensor<T>&,                  \
                                           std::span<const std::size_t>);     \
  template std::vector<T> softmax(const Tensor<T>&);

XC1D_INSTANTIATE_LAYERS(float)
XC1D_INSTANTIATE_LAYERS(double)

#undef XC1D_INSTANTIATE_LAYERS

}  // namespace layers
}  // namespace xc1d
