#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "xc1d/errors.hpp"

namespace xc1d {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

template <typename T>
class Tensor;

namespace detail {

template <typename T>
struct Node {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;  // empty until something is accumulated
  bool requires_grad = false;
  bool consumed = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads this->grad and accumulates into inputs' grads.
  std::function<void(Node&)> backward_fn;

  bool is_leaf() const { return inputs.empty() && !backward_fn && !consumed; }

  std::vector<T>& grad_buffer() {
    if (grad.empty()) grad.assign(data.size(), T(0));
    return grad;
  }
};

template <typename T>
using NodePtr = std::shared_ptr<Node<T>>;

}  // namespace detail

/// Dense row-major array of T with optional reverse-mode gradient tracking.
///
/// Tensor is a cheap handle: copies share the same storage. Values produced
/// by primitives are never mutated afterwards; only leaves (parameters) are
/// updated in place through mutable_data().
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  Tensor(Shape shape, std::vector<T> data, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, T value, bool requires_grad = false);
  static Tensor scalar(T value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;

  std::span<const T> data() const;
  /// Writable view; only permitted on leaf tensors.
  std::span<T> mutable_data();
  T item() const;

  bool requires_grad() const;
  void set_requires_grad(bool on);
  bool has_grad() const;
  /// Empty span when no gradient has been accumulated.
  std::span<const T> grad() const;
  void zero_grad();

  /// Reverse pass from a single-element root. Leaf gradients accumulate by
  /// summation across calls; the recorded graph is released afterwards.
  void backward() const;

  /// New leaf holding a copy of the data, disconnected from any graph.
  Tensor detach() const;
  /// Like detach() but keeps requires_grad.
  Tensor clone() const;

  template <typename U>
  Tensor<U> cast() const {
    std::vector<U> out(numel());
    const auto in = data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<U>(in[i]);
    return Tensor<U>(shape(), std::move(out), requires_grad());
  }

  const detail::NodePtr<T>& node() const { return node_; }
  static Tensor from_node(detail::NodePtr<T> node);

 private:
  detail::NodePtr<T> node_;
};

/// The recorded computation reachable from a root, in topological order
/// (every node after all of its inputs). Built on demand by backward().
template <typename T>
class Graph {
 public:
  explicit Graph(const Tensor<T>& root);

  std::size_t size() const { return order_.size(); }
  const std::vector<detail::NodePtr<T>>& nodes() const { return order_; }

  /// Visits every node once in reverse order and frees the tape.
  void backward();

 private:
  detail::NodePtr<T> root_;
  std::vector<detail::NodePtr<T>> order_;
};

/// Scalar-valued function of one tensor, used by grad_check.
using ScalarFn = std::function<Tensor<double>(const Tensor<double>&)>;

/// Max over coordinates of |analytic - numeric| / max(|analytic|, |numeric|,
/// 1e-8), with numeric from central differences of step h.
double grad_check(const ScalarFn& f, const Tensor<double>& x, double h = 1e-4);

extern template class Tensor<float>;
extern template class Tensor<double>;
extern template class Graph<float>;
extern template class Graph<double>;

}  // namespace xc1d
