#include "fsegan/ad/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace fsegan::ad {

template <typename T>
AdamState<T> AdamState<T>::for_params(std::span<const Tensor<T>> params, AdamConfig config) {
  AdamState state;
  state.config = config;
  for (const auto& p : params) {
    state.m.emplace_back(p.size(), T{0});
    state.v.emplace_back(p.size(), T{0});
  }
  return state;
}

template <typename T>
void adam_step(std::span<Tensor<T>> params, AdamState<T>& state) {
  if (params.size() != state.m.size() || params.size() != state.v.size()) {
    throw std::invalid_argument("adam: state tracks " + std::to_string(state.m.size()) + " tensors, got " +
                                std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].size() != state.m[i].size()) {
      throw std::invalid_argument("adam: moment shape mismatch for parameter " + std::to_string(i));
    }
  }
  ++state.step;
  const auto& c = state.config;
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(c.beta1, t);
  const double bias2 = 1.0 - std::pow(c.beta2, t);
  const T b1 = static_cast<T>(c.beta1), b2 = static_cast<T>(c.beta2);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto data = params[i].data();
    const bool has_grad = params[i].has_grad();
    const auto grad = params[i].grad();
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t j = 0; j < data.size(); ++j) {
      const T g = has_grad ? grad[j] : T{0};
      m[j] = b1 * m[j] + (T{1} - b1) * g;
      v[j] = b2 * v[j] + (T{1} - b2) * g * g;
      const double m_hat = m[j] / bias1;
      const double v_hat = v[j] / bias2;
      data[j] -= static_cast<T>(c.lr * m_hat / (std::sqrt(v_hat) + c.eps));
    }
  }
}

template struct AdamState<float>;
template struct AdamState<double>;
template void adam_step(std::span<Tensor<float>>, AdamState<float>&);
template void adam_step(std::span<Tensor<double>>, AdamState<double>&);

}  // namespace fsegan::ad
