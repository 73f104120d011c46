#pragma once

#include <cassert>
#include <cmath>
#include <initializer_list>
#include <utility>

#include "xc1d/tensor.hpp"

namespace xc1d::detail {

template <typename T>
bool all_finite(const std::vector<T>& v) {
  for (const T& x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

/// Creates the output node of a primitive. The backward rule is attached
/// only when some input requires a gradient.
template <typename T, typename Backward>
Tensor<T> make_result(const char* op, Shape shape, std::vector<T> data,
                      std::initializer_list<const Tensor<T>*> inputs,
                      Backward&& backward) {
  auto node = std::make_shared<Node<T>>();
  node->op = op;
  node->shape = std::move(shape);
  node->data = std::move(data);
#ifndef NDEBUG
  bool finite_inputs = true;
  for (const auto* in : inputs) {
    finite_inputs = finite_inputs && all_finite(in->node()->data);
  }
  assert(!finite_inputs || all_finite(node->data));
#endif
  bool track = false;
  for (const auto* in : inputs) track = track || in->requires_grad();
  if (track) {
    node->requires_grad = true;
    for (const auto* in : inputs) node->inputs.push_back(in->node());
    node->backward_fn = std::forward<Backward>(backward);
  }
  return Tensor<T>::from_node(std::move(node));
}

/// Same as make_result for a variable number of inputs.
template <typename T, typename Backward>
Tensor<T> make_result_n(const char* op, Shape shape, std::vector<T> data,
                        const std::vector<Tensor<T>>& inputs,
                        Backward&& backward) {
  auto node = std::make_shared<Node<T>>();
  node->op = op;
  node->shape = std::move(shape);
  node->data = std::move(data);
  bool track = false;
  for (const auto& in : inputs) track = track || in.requires_grad();
  if (track) {
    node->requires_grad = true;
    for (const auto& in : inputs) node->inputs.push_back(in.node());
    node->backward_fn = std::forward<Backward>(backward);
  }
  return Tensor<T>::from_node(std::move(node));
}

/// Accumulation target for input i, or nullptr when it needs no gradient.
template <typename T>
std::vector<T>* grad_target(Node<T>& self, std::size_t i) {
  auto& in = *self.inputs[i];
  return in.requires_grad ? &in.grad_buffer() : nullptr;
}

}  // namespace xc1d::detail
