#include "xc1d/tensor.hpp"

#include <cmath>
#include <sstream>
#include <unordered_set>
#include <utility>

namespace xc1d {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data, bool requires_grad) {
  for (auto d : shape) {
    if (d == 0) {
      throw ShapeError("tensor: zero extent in shape " + shape_to_string(shape));
    }
  }
  if (shape_numel(shape) != data.size()) {
    throw ShapeError("tensor: shape " + shape_to_string(shape) + " needs " +
                     std::to_string(shape_numel(shape)) + " values, got " +
                     std::to_string(data.size()));
  }
  node_ = std::make_shared<detail::Node<T>>();
  node_->shape = std::move(shape);
  node_->data = std::move(data);
  node_->requires_grad = requires_grad;
}

template <typename T>
Tensor<T> Tensor<T>::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), T(0), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::full(Shape shape, T value, bool requires_grad) {
  const auto n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<T>(n, value), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::scalar(T value, bool requires_grad) {
  return Tensor({1}, {value}, requires_grad);
}

template <typename T>
const Shape& Tensor<T>::shape() const {
  if (!node_) throw GraphError("tensor: use of undefined tensor");
  return node_->shape;
}

template <typename T>
std::size_t Tensor<T>::dim(std::size_t axis) const {
  const auto& s = shape();
  if (axis >= s.size()) {
    throw ShapeError("tensor: axis " + std::to_string(axis) +
                     " out of range for shape " + shape_to_string(s));
  }
  return s[axis];
}

template <typename T>
std::size_t Tensor<T>::numel() const {
  return node_ ? node_->data.size() : 0;
}

template <typename T>
std::span<const T> Tensor<T>::data() const {
  if (!node_) return {};
  return node_->data;
}

template <typename T>
std::span<T> Tensor<T>::mutable_data() {
  if (!node_) return {};
  if (!node_->is_leaf()) {
    throw GraphError("tensor: in-place write to a non-leaf tensor");
  }
  return node_->data;
}

template <typename T>
T Tensor<T>::item() const {
  if (numel() != 1) {
    throw ShapeError("tensor: item() on shape " + shape_to_string(shape()));
  }
  return node_->data[0];
}

template <typename T>
bool Tensor<T>::requires_grad() const {
  return node_ && node_->requires_grad;
}

template <typename T>
void Tensor<T>::set_requires_grad(bool on) {
  if (!node_) return;
  if (!node_->is_leaf()) {
    throw GraphError("tensor: requires_grad can only be changed on leaves");
  }
  node_->requires_grad = on;
}

template <typename T>
bool Tensor<T>::has_grad() const {
  return node_ && !node_->grad.empty();
}

template <typename T>
std::span<const T> Tensor<T>::grad() const {
  if (!node_) return {};
  return node_->grad;
}

template <typename T>
void Tensor<T>::zero_grad() {
  if (node_) node_->grad.clear();
}

template <typename T>
void Tensor<T>::backward() const {
  Graph<T> graph(*this);
  graph.backward();
}

template <typename T>
Tensor<T> Tensor<T>::detach() const {
  return Tensor(shape(), node_->data, false);
}

template <typename T>
Tensor<T> Tensor<T>::clone() const {
  return Tensor(shape(), node_->data, requires_grad());
}

template <typename T>
Tensor<T> Tensor<T>::from_node(detail::NodePtr<T> node) {
  Tensor t;
  t.node_ = std::move(node);
  return t;
}

template <typename T>
Graph<T>::Graph(const Tensor<T>& root) : root_(root.node()) {
  if (!root_) throw GraphError("backward: undefined root");
  if (root_->data.size() != 1) {
    throw GraphError("backward: root must be scalar, got shape " +
                     shape_to_string(root_->shape));
  }
  if (root_->consumed) throw GraphError("backward: graph already consumed");
  if (!root_->requires_grad) {
    throw GraphError("backward: root was not produced by a recorded graph");
  }

  // Iterative post-order DFS; emits each node after all of its inputs.
  std::unordered_set<const detail::Node<T>*> visited;
  std::vector<std::pair<detail::NodePtr<T>, std::size_t>> stack;
  stack.emplace_back(root_, 0);
  visited.insert(root_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      auto child = node->inputs[next++];
      if (child->requires_grad && !visited.count(child.get())) {
        if (child->consumed) {
          throw GraphError("backward: graph already consumed");
        }
        visited.insert(child.get());
        stack.emplace_back(std::move(child), 0);
      }
      continue;
    }
    order_.push_back(node);
    stack.pop_back();
  }
}

template <typename T>
void Graph<T>::backward() {
  if (root_->consumed) throw GraphError("backward: graph already consumed");
  root_->grad_buffer()[0] += T(1);
  for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
    auto& node = **it;
    if (node.backward_fn && !node.grad.empty()) node.backward_fn(node);
  }
  for (auto& node : order_) {
    if (node->is_leaf()) continue;
    node->grad.clear();
    node->grad.shrink_to_fit();
    node->backward_fn = nullptr;
    node->inputs.clear();
    node->consumed = true;
  }
  order_.clear();
}

double grad_check(const ScalarFn& f, const Tensor<double>& x, double h) {
  auto leaf = x.detach();
  leaf.set_requires_grad(true);
  auto y = f(leaf);
  y.backward();
  std::vector<double> analytic(leaf.numel(), 0.0);
  if (leaf.has_grad()) {
    const auto g = leaf.grad();
    analytic.assign(g.begin(), g.end());
  }

  auto probe = x.detach();
  auto values = probe.mutable_data();
  double worst = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double saved = values[i];
    values[i] = saved + h;
    const double up = f(probe).item();
    values[i] = saved - h;
    const double down = f(probe).item();
    values[i] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double denom =
        std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

template class Tensor<float>;
template class Tensor<double>;
template class Graph<float>;
template class Graph<double>;

}  // namespace xc1d
