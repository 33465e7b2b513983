#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fsegan::ad {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

template <typename T>
struct Node {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;  // empty until a gradient arrives
  bool requires_grad = false;
  bool consumed = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this node's grad and accumulates into the parents' grads.
  std::function<void(Node&)> backward_fn;

  void ensure_grad() {
    if (grad.empty()) grad.assign(data.size(), T{0});
  }
};

/// Process-wide switch that stops operations from recording the graph.
/// Construct a NoGradGuard for inference and frozen-network passes.
bool grad_enabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

namespace detail {
void set_grad_enabled(bool enabled);
}

/// Dense row-major tensor with shared ownership of its graph node.
///
/// Copies are shallow: two Tensor handles may refer to the same node, which
/// is how parameters are shared between a model and its optimizer.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

  static Tensor zeros(Shape shape, bool requires_grad = false) {
    auto n = std::make_shared<Node<T>>();
    n->data.assign(shape_size(shape), T{0});
    n->shape = std::move(shape);
    n->requires_grad = requires_grad;
    return Tensor(std::move(n));
  }

  static Tensor full(Shape shape, T value, bool requires_grad = false) {
    auto t = zeros(std::move(shape), requires_grad);
    std::fill(t.node_->data.begin(), t.node_->data.end(), value);
    return t;
  }

  static Tensor from(Shape shape, std::vector<T> values, bool requires_grad = false) {
    if (values.size() != shape_size(shape)) {
      throw std::invalid_argument("tensor data length " + std::to_string(values.size()) +
                                  " does not match shape " + shape_string(shape));
    }
    auto n = std::make_shared<Node<T>>();
    n->shape = std::move(shape);
    n->data = std::move(values);
    n->requires_grad = requires_grad;
    return Tensor(std::move(n));
  }

  static Tensor scalar(T value, bool requires_grad = false) { return from({1}, {value}, requires_grad); }

  bool defined() const { return static_cast<bool>(node_); }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t dim(std::size_t i) const { return node_->shape.at(i); }
  std::size_t size() const { return node_->data.size(); }

  std::span<T> data() { return node_->data; }
  std::span<const T> data() const { return node_->data; }
  std::vector<T>& values() { return node_->data; }

  bool has_grad() const { return !node_->grad.empty(); }
  std::span<const T> grad() const { return node_->grad; }
  std::span<T> grad() { return node_->grad; }

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool on) {
    if (!node_->parents.empty()) throw std::logic_error("requires_grad can only change on leaf tensors");
    node_->requires_grad = on;
    if (!on) node_->grad.clear();
  }

  void zero_grad() {
    if (node_->requires_grad) node_->grad.assign(node_->data.size(), T{0});
  }

  T item() const {
    if (size() != 1) throw std::logic_error("item() on tensor of shape " + shape_string(shape()));
    return node_->data[0];
  }

  /// New leaf holding a copy of the data, outside any graph.
  Tensor detach() const { return from(shape(), node_->data, false); }

  /// Reverse-mode sweep from this scalar. Leaf gradients accumulate; the
  /// graph behind this tensor is released afterwards.
  void backward();

  const std::shared_ptr<Node<T>>& node() const { return node_; }

 private:
  std::shared_ptr<Node<T>> node_;
};

/// Builds a result node. When gradients are enabled and any input requires
/// them, the node records `inputs` and `backward_fn`.
template <typename T>
Tensor<T> make_result(Shape shape, std::vector<T> data, std::initializer_list<Tensor<T>> inputs,
                      std::function<void(Node<T>&)> backward_fn) {
  auto n = std::make_shared<Node<T>>();
  n->shape = std::move(shape);
  n->data = std::move(data);
  if (grad_enabled()) {
    bool any = false;
    for (const auto& in : inputs) {
      if (in.node()->consumed) {
        throw std::logic_error("input tensor's graph was already consumed by backward()");
      }
      any = any || in.requires_grad();
    }
    if (any) {
      n->requires_grad = true;
      for (const auto& in : inputs) n->parents.push_back(in.node());
      n->backward_fn = std::move(backward_fn);
    }
  }
  return Tensor<T>(std::move(n));
}

/// Converts a tensor's data to another scalar type (new leaf).
template <typename To, typename From>
Tensor<To> cast(const Tensor<From>& t, bool requires_grad = false) {
  std::vector<To> v(t.data().begin(), t.data().end());
  return Tensor<To>::from(t.shape(), std::move(v), requires_grad);
}

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace fsegan::ad
