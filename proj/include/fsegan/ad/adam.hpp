#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fsegan/ad/tensor.hpp"

namespace fsegan::ad {

struct AdamConfig {
  double lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename T>
struct AdamState {
  AdamConfig config;
  std::vector<std::vector<T>> m;
  std::vector<std::vector<T>> v;
  std::uint64_t step = 0;

  static AdamState for_params(std::span<const Tensor<T>> params, AdamConfig config = {});
};

/// One bias-corrected Adam update of every parameter from its grad.
/// Parameters without a gradient are treated as having a zero gradient.
template <typename T>
void adam_step(std::span<Tensor<T>> params, AdamState<T>& state);

}  // namespace fsegan::ad
