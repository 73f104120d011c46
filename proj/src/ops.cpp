#include "xc1d/ops.hpp"

#include <cmath>
#include <string>

#include "op_builder.hpp"

namespace xc1d::ops {
namespace {

using detail::grad_target;
using detail::make_result;
using detail::Node;

void require_same_shape(const char* op, const Shape& a, const Shape& b) {
  if (a != b) {
    throw ShapeError(std::string(op) + ": shape mismatch " +
                     shape_to_string(a) + " vs " + shape_to_string(b));
  }
}

void require_axis(const char* op, const Shape& s, std::size_t axis) {
  if (axis >= s.size()) {
    throw ShapeError(std::string(op) + ": axis " + std::to_string(axis) +
                     " out of range for shape " + shape_to_string(s));
  }
}

// Splits a shape around one axis into (outer, extent, inner) strides.
struct AxisView {
  std::size_t outer = 1;
  std::size_t extent = 1;
  std::size_t inner = 1;
};

AxisView axis_view(const Shape& s, std::size_t axis) {
  AxisView v;
  for (std::size_t i = 0; i < axis; ++i) v.outer *= s[i];
  v.extent = s[axis];
  for (std::size_t i = axis + 1; i < s.size(); ++i) v.inner *= s[i];
  return v;
}

template <typename T, typename Fwd, typename Deriv>
Tensor<T> unary(const char* op, const Tensor<T>& a, Fwd fwd, Deriv deriv) {
  const auto in = a.data();
  std::vector<T> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = fwd(in[i]);
  return make_result(op, a.shape(), std::move(out), {&a},
                     [deriv](Node<T>& self) {
                       auto* ga = grad_target(self, 0);
                       if (!ga) return;
                       const auto& x = self.inputs[0]->data;
                       for (std::size_t i = 0; i < x.size(); ++i) {
                         (*ga)[i] += self.grad[i] * deriv(x[i], self.data[i]);
                       }
                     });
}

}  // namespace

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape("add", a.shape(), b.shape());
  const auto x = a.data();
  const auto y = b.data();
  std::vector<T> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
  return make_result("add", a.shape(), std::move(out), {&a, &b},
                     [](Node<T>& self) {
                       for (std::size_t k = 0; k < 2; ++k) {
                         if (auto* g = grad_target(self, k)) {
                           for (std::size_t i = 0; i < g->size(); ++i) {
                             (*g)[i] += self.grad[i];
                           }
                         }
                       }
                     });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape("sub", a.shape(), b.shape());
  const auto x = a.data();
  const auto y = b.data();
  std::vector<T> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - y[i];
  return make_result("sub", a.shape(), std::move(out), {&a, &b},
                     [](Node<T>& self) {
                       if (auto* g = grad_target(self, 0)) {
                         for (std::size_t i = 0; i < g->size(); ++i) {
                           (*g)[i] += self.grad[i];
                         }
                       }
                       if (auto* g = grad_target(self, 1)) {
                         for (std::size_t i = 0; i < g->size(); ++i) {
                           (*g)[i] -= self.grad[i];
                         }
                       }
                     });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape("mul", a.shape(), b.shape());
  const auto x = a.data();
  const auto y = b.data();
  std::vector<T> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
  return make_result("mul", a.shape(), std::move(out), {&a, &b},
                     [](Node<T>& self) {
                       const auto& x = self.inputs[0]->data;
                       const auto& y = self.inputs[1]->data;
                       if (auto* g = grad_target(self, 0)) {
                         for (std::size_t i = 0; i < g->size(); ++i) {
                           (*g)[i] += self.grad[i] * y[i];
                         }
                       }
                       if (auto* g = grad_target(self, 1)) {
                         for (std::size_t i = 0; i < g->size(); ++i) {
                           (*g)[i] += self.grad[i] * x[i];
                         }
                       }
                     });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T factor) {
  const auto x = a.data();
  std::vector<T> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * factor;
  return make_result("scale", a.shape(), std::move(out), {&a},
                     [factor](Node<T>& self) {
                       if (auto* g = grad_target(self, 0)) {
                         for (std::size_t i = 0; i < g->size(); ++i) {
                           (*g)[i] += self.grad[i] * factor;
                         }
                       }
                     });
}

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw ShapeError("matmul: shape mismatch " + shape_to_string(a.shape()) +
                     " vs " + shape_to_string(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  const auto x = a.data();
  const auto y = b.data();
  std::vector<T> out(m * n, T(0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const T xv = x[i * k + p];
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += xv * y[p * n + j];
    }
  }
  return make_result(
      "matmul", Shape{m, n}, std::move(out), {&a, &b},
      [m, k, n](Node<T>& self) {
        const auto& x = self.inputs[0]->data;
        const auto& y = self.inputs[1]->data;
        const auto& g = self.grad;
        if (auto* ga = grad_target(self, 0)) {
          for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t p = 0; p < k; ++p) {
              T acc = T(0);
              for (std::size_t j = 0; j < n; ++j) {
                acc += g[i * n + j] * y[p * n + j];
              }
              (*ga)[i * k + p] += acc;
            }
          }
        }
        if (auto* gb = grad_target(self, 1)) {
          for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t p = 0; p < k; ++p) {
              const T xv = x[i * k + p];
              for (std::size_t j = 0; j < n; ++j) {
                (*gb)[p * n + j] += xv * g[i * n + j];
              }
            }
          }
        }
      });
}

template <typename T>
Tensor<T> reduce_sum(const Tensor<T>& a) {
  T acc = T(0);
  for (T v : a.data()) acc += v;
  return make_result("reduce_sum", Shape{1}, std::vector<T>{acc}, {&a},
                     [](Node<T>& self) {
                       if (auto* g = grad_target(self, 0)) {
                         for (auto& v : *g) v += self.grad[0];
                       }
                     });
}

template <typename T>
Tensor<T> reduce_mean(const Tensor<T>& a) {
  const T n = static_cast<T>(a.numel());
  T acc = T(0);
  for (T v : a.data()) acc += v;
  return make_result("reduce_mean", Shape{1}, std::vector<T>{acc / n}, {&a},
                     [n](Node<T>& self) {
                       if (auto* g = grad_target(self, 0)) {
                         const T share = self.grad[0] / n;
                         for (auto& v : *g) v += share;
                       }
                     });
}

template <typename T>
Tensor<T> reduce_mean(const Tensor<T>& a, std::size_t axis) {
  require_axis("reduce_mean", a.shape(), axis);
  const auto v = axis_view(a.shape(), axis);
  Shape out_shape = a.shape();
  out_shape[axis] = 1;
  const auto x = a.data();
  std::vector<T> out(v.outer * v.inner, T(0));
  for (std::size_t o = 0; o < v.outer; ++o) {
    for (std::size_t e = 0; e < v.extent; ++e) {
      for (std::size_t i = 0; i < v.inner; ++i) {
        out[o * v.inner + i] += x[(o * v.extent + e) * v.inner + i];
      }
    }
  }
  const T n = static_cast<T>(v.extent);
  for (auto& m : out) m /= n;
  return make_result("reduce_mean_axis", std::move(out_shape), std::move(out),
                     {&a}, [v, n](Node<T>& self) {
                       auto* g = grad_target(self, 0);
                       if (!g) return;
                       for (std::size_t o = 0; o < v.outer; ++o) {
                         for (std::size_t e = 0; e < v.extent; ++e) {
                           for (std::size_t i = 0; i < v.inner; ++i) {
                             (*g)[(o * v.extent + e) * v.inner + i] +=
                                 self.grad[o * v.inner + i] / n;
                           }
                         }
                       }
                     });
}

template <typename T>
Tensor<T> reduce_var(const Tensor<T>& a, std::size_t axis) {
  require_axis("reduce_var", a.shape(), axis);
  const auto v = axis_view(a.shape(), axis);
  Shape out_shape = a.shape();
  out_shape[axis] = 1;
  const auto x = a.data();
  const T n = static_cast<T>(v.extent);
  std::vector<T> mean(v.outer * v.inner, T(0));
  std::vector<T> out(v.outer * v.inner, T(0));
  for (std::size_t o = 0; o < v.outer; ++o) {
    for (std::size_t i = 0; i < v.inner; ++i) {
      T acc = T(0);
      for (std::size_t e = 0; e < v.extent; ++e) {
        acc += x[(o * v.extent + e) * v.inner + i];
      }
      const T mu = acc / n;
      T sq = T(0);
      for (std::size_t e = 0; e < v.extent; ++e) {
        const T d = x[(o * v.extent + e) * v.inner + i] - mu;
        sq += d * d;
      }
      mean[o * v.inner + i] = mu;
      out[o * v.inner + i] = sq / n;
    }
  }
  return make_result("reduce_var", std::move(out_shape), std::move(out), {&a},
                     [v, n, mean = std::move(mean)](Node<T>& self) {
                       auto* g = grad_target(self, 0);
                       if (!g) return;
                       const auto& x = self.inputs[0]->data;
                       for (std::size_t o = 0; o < v.outer; ++o) {
                         for (std::size_t i = 0; i < v.inner; ++i) {
                           const T go = self.grad[o * v.inner + i];
                           const T mu = mean[o * v.inner + i];
                           for (std::size_t e = 0; e < v.extent; ++e) {
                             const auto idx = (o * v.extent + e) * v.inner + i;
                             (*g)[idx] += go * T(2) * (x[idx] - mu) / n;
                           }
                         }
                       }
                     });
}

template <typename T>
Tensor<T> broadcast_to(const Tensor<T>& a, const Shape& shape) {
  const Shape& src = a.shape();
  auto fail = [&] {
    throw ShapeError("broadcast: cannot broadcast " + shape_to_string(src) +
                     " to " + shape_to_string(shape));
  };
  if (src.size() > shape.size()) fail();
  const std::size_t lead = shape.size() - src.size();
  // Source stride per target axis; 0 on broadcast axes.
  std::vector<std::size_t> stride(shape.size(), 0);
  std::size_t running = 1;
  for (std::size_t k = src.size(); k-- > 0;) {
    const std::size_t t = k + lead;
    if (src[k] == shape[t]) {
      stride[t] = running;
    } else if (src[k] != 1) {
      fail();
    }
    running *= src[k];
  }
  for (auto d : shape) {
    if (d == 0) fail();
  }
  const std::size_t total = shape_numel(shape);
  std::vector<std::size_t> index_map(total);
  {
    std::vector<std::size_t> idx(shape.size(), 0);
    std::size_t offset = 0;
    for (std::size_t flat = 0; flat < total; ++flat) {
      index_map[flat] = offset;
      for (std::size_t d = shape.size(); d-- > 0;) {
        ++idx[d];
        offset += stride[d];
        if (idx[d] < shape[d]) break;
        offset -= stride[d] * idx[d];
        idx[d] = 0;
      }
    }
  }
  const auto x = a.data();
  std::vector<T> out(total);
  for (std::size_t i = 0; i < total; ++i) out[i] = x[index_map[i]];
  return make_result("broadcast", shape, std::move(out), {&a},
                     [index_map = std::move(index_map)](Node<T>& self) {
                       if (auto* g = grad_target(self, 0)) {
                         for (std::size_t i = 0; i < index_map.size(); ++i) {
                           (*g)[index_map[i]] += self.grad[i];
                         }
                       }
                     });
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& a, const Shape& shape) {
  if (shape_numel(shape) != a.numel()) {
    throw ShapeError("reshape: shape mismatch " + shape_to_string(a.shape()) +
                     " vs " + shape_to_string(shape));
  }
  const auto x = a.data();
  return make_result("reshape", shape, std::vector<T>(x.begin(), x.end()),
                     {&a}, [](Node<T>& self) {
                       if (auto* g = grad_target(self, 0)) {
                         for (std::size_t i = 0; i < g->size(); ++i) {
                           (*g)[i] += self.grad[i];
                         }
                       }
                     });
}

template <typename T>
Tensor<T> slice(const Tensor<T>& a, std::size_t axis, std::size_t start,
                std::size_t length) {
  require_axis("slice", a.shape(), axis);
  if (length == 0 || start + length > a.dim(axis)) {
    throw ShapeError("slice: range [" + std::to_string(start) + ", " +
                     std::to_string(start + length) + ") invalid for shape " +
                     shape_to_string(a.shape()));
  }
  const auto v = axis_view(a.shape(), axis);
  Shape out_shape = a.shape();
  out_shape[axis] = length;
  const auto x = a.data();
  std::vector<T> out(v.outer * length * v.inner);
  for (std::size_t o = 0; o < v.outer; ++o) {
    for (std::size_t e = 0; e < length; ++e) {
      for (std::size_t i = 0; i < v.inner; ++i) {
        out[(o * length + e) * v.inner + i] =
            x[(o * v.extent + start + e) * v.inner + i];
      }
    }
  }
  return make_result("slice", std::move(out_shape), std::move(out), {&a},
                     [v, start, length](Node<T>& self) {
                       auto* g = grad_target(self, 0);
                       if (!g) return;
                       for (std::size_t o = 0; o < v.outer; ++o) {
                         for (std::size_t e = 0; e < length; ++e) {
                           for (std::size_t i = 0; i < v.inner; ++i) {
                             (*g)[(o * v.extent + start + e) * v.inner + i] +=
                                 self.grad[(o * length + e) * v.inner + i];
                           }
                         }
                       }
                     });
}

template <typename T>
Tensor<T> pad(const Tensor<T>& a, std::size_t axis, std::size_t before,
              std::size_t after) {
  require_axis("pad", a.shape(), axis);
  const auto v = axis_view(a.shape(), axis);
  const std::size_t extent = v.extent + before + after;
  Shape out_shape = a.shape();
  out_shape[axis] = extent;
  const auto x = a.data();
  std::vector<T> out(v.outer * extent * v.inner, T(0));
  for (std::size_t o = 0; o < v.outer; ++o) {
    for (std::size_t e = 0; e < v.extent; ++e) {
      for (std::size_t i = 0; i < v.inner; ++i) {
        out[(o * extent + before + e) * v.inner + i] =
            x[(o * v.extent + e) * v.inner + i];
      }
    }
  }
  return make_result("pad", std::move(out_shape), std::move(out), {&a},
                     [v, before, extent](Node<T>& self) {
                       auto* g = grad_target(self, 0);
                       if (!g) return;
                       for (std::size_t o = 0; o < v.outer; ++o) {
                         for (std::size_t e = 0; e < v.extent; ++e) {
                           for (std::size_t i = 0; i < v.inner; ++i) {
                             (*g)[(o * v.extent + e) * v.inner + i] +=
                                 self.grad[(o * extent + before + e) * v.inner +
                                           i];
                           }
                         }
                       }
                     });
}

template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  const Shape& first = parts.front().shape();
  require_axis("concat", first, axis);
  std::vector<std::size_t> offsets;
  std::size_t extent = 0;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    bool ok = s.size() == first.size();
    for (std::size_t d = 0; ok && d < s.size(); ++d) {
      ok = d == axis || s[d] == first[d];
    }
    if (!ok) {
      throw ShapeError("concat: shape mismatch " + shape_to_string(first) +
                       " vs " + shape_to_string(s));
    }
    offsets.push_back(extent);
    extent += s[axis];
  }
  Shape out_shape = first;
  out_shape[axis] = extent;
  const auto v = axis_view(out_shape, axis);
  std::vector<T> out(shape_numel(out_shape));
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto x = parts[k].data();
    const std::size_t len = parts[k].dim(axis);
    for (std::size_t o = 0; o < v.outer; ++o) {
      for (std::size_t e = 0; e < len; ++e) {
        for (std::size_t i = 0; i < v.inner; ++i) {
          out[(o * extent + offsets[k] + e) * v.inner + i] =
              x[(o * len + e) * v.inner + i];
        }
      }
    }
  }
  return detail::make_result_n(
      "concat", std::move(out_shape), std::move(out), parts,
      [v, axis, extent, offsets = std::move(offsets)](Node<T>& self) {
        for (std::size_t k = 0; k < self.inputs.size(); ++k) {
          auto* g = grad_target(self, k);
          if (!g) continue;
          const std::size_t len = self.inputs[k]->shape[axis];
          for (std::size_t o = 0; o < v.outer; ++o) {
            for (std::size_t e = 0; e < len; ++e) {
              for (std::size_t i = 0; i < v.inner; ++i) {
                (*g)[(o * len + e) * v.inner + i] +=
                    self.grad[(o * extent + offsets[k] + e) * v.inner + i];
              }
            }
          }
        }
      });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& a) {
  return unary(
      "relu", a, [](T x) { return x > T(0) ? x : T(0); },
      [](T x, T) { return x > T(0) ? T(1) : T(0); });
}

template <typename T>
Tensor<T> exp(const Tensor<T>& a) {
  return unary(
      "exp", a, [](T x) { return std::exp(x); }, [](T, T y) { return y; });
}

template <typename T>
Tensor<T> log(const Tensor<T>& a) {
  return unary(
      "log", a, [](T x) { return std::log(x); },
      [](T x, T) { return T(1) / x; });
}

#define XC1D_INSTANTIATE_OPS(T)                                              \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                \
  template Tensor<T> scale(const Tensor<T>&, T);                             \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);             \
  template Tensor<T> reduce_sum(const Tensor<T>&);                           \
  template Tensor<T> reduce_mean(const Tensor<T>&);                          \
  template Tensor<T> reduce_mean(const Tensor<T>&, std::size_t);             \
  template Tensor<T> reduce_var(const Tensor<T>&, std::size_t);              \
  template Tensor<T> broadcast_to(const Tensor<T>&, const Shape&);           \
  template Tensor<T> reshape(const Tensor<T>&, const Shape&);                \
  template Tensor<T> slice(const Tensor<T>&, std::size_t, std::size_t,       \
                           std::size_t);                                     \
  template Tensor<T> pad(const Tensor<T>&, std::size_t, std::size_t,         \
                         std::size_t);                                       \
  template Tensor<T> concat(const std::vector<Tensor<T>>&, std::size_t);     \
  template Tensor<T> relu(const Tensor<T>&);                                 \
  template Tensor<T> exp(const Tensor<T>&);                                  \
  template Tensor<T> log(const Tensor<T>&);

XC1D_INSTANTIATE_OPS(float)
XC1D_INSTANTIATE_OPS(double)

#undef XC1D_INSTANTIATE_OPS

}  // namespace xc1d::ops
