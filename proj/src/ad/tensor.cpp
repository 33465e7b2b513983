#include "fsegan/ad/tensor.hpp"

#include <unordered_set>

namespace fsegan::ad {

namespace {
thread_local bool g_grad_enabled = true;
}

bool grad_enabled() { return g_grad_enabled; }

namespace detail {
void set_grad_enabled(bool enabled) { g_grad_enabled = enabled; }
}  // namespace detail

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

template <typename T>
void Tensor<T>::backward() {
  if (size() != 1) throw std::logic_error("backward() needs a scalar loss, got " + shape_string(shape()));
  if (node_->consumed) throw std::logic_error("backward() called twice on one graph; re-run forward first");
  if (!node_->requires_grad) throw std::logic_error("loss does not depend on any tensor requiring grad");

  // Iterative post-order DFS gives a topological order (parents first).
  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> seen;
  std::vector<std::pair<Node<T>*, std::size_t>> stack{{node_.get(), 0}};
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      Node<T>* p = n->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.push_back({p, 0});
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  node_->ensure_grad();
  node_->grad[0] += T{1};
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* n = *it;
    if (!n->backward_fn) continue;
    n->ensure_grad();
    for (auto& p : n->parents) {
      if (p->requires_grad) p->ensure_grad();
    }
    n->backward_fn(*n);
  }
  for (Node<T>* n : order) {
    if (n->parents.empty()) continue;  // leaves keep their gradients
    n->parents.clear();
    n->backward_fn = nullptr;
    n->grad.clear();
    n->grad.shrink_to_fit();
    n->consumed = true;
  }
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace fsegan::ad
