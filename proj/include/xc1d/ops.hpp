#pragma once

#include <vector>

#include "xc1d/tensor.hpp"

// Differentiable tensor primitives. Shape mismatches raise ShapeError naming
// the primitive and both operand shapes.
namespace xc1d::ops {

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
/// Multiply by a constant.
template <typename T>
Tensor<T> scale(const Tensor<T>& a, T factor);

/// [M,K] x [K,N] -> [M,N]
template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);

/// Sum / mean of all elements, shape [1].
template <typename T>
Tensor<T> reduce_sum(const Tensor<T>& a);
template <typename T>
Tensor<T> reduce_mean(const Tensor<T>& a);
/// Mean along one axis; the axis is kept with extent 1.
template <typename T>
Tensor<T> reduce_mean(const Tensor<T>& a, std::size_t axis);
/// Biased (divide-by-n) variance along one axis, axis kept with extent 1.
template <typename T>
Tensor<T> reduce_var(const Tensor<T>& a, std::size_t axis);

/// Right-aligned broadcasting: each source extent is 1 or equals the target.
template <typename T>
Tensor<T> broadcast_to(const Tensor<T>& a, const Shape& shape);
template <typename T>
Tensor<T> reshape(const Tensor<T>& a, const Shape& shape);

template <typename T>
Tensor<T> slice(const Tensor<T>& a, std::size_t axis, std::size_t start,
                std::size_t length);
/// Zero padding along one axis.
template <typename T>
Tensor<T> pad(const Tensor<T>& a, std::size_t axis, std::size_t before,
              std::size_t after);
template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& parts, std::size_t axis);

template <typename T>
Tensor<T> relu(const Tensor<T>& a);
template <typename T>
Tensor<T> exp(const Tensor<T>& a);
template <typename T>
Tensor<T> log(const Tensor<T>& a);

}  // namespace xc1d::ops
