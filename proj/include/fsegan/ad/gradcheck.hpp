#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>

#include "fsegan/ad/tensor.hpp"

namespace fsegan::ad {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t worst_tensor = 0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t refined = 0;  // entries re-estimated with other steps


  std::string summary() const;
};

/// |a - n| / max(|a|, |n|, floor).
double relative_error(double analytic, double numeric, double floor = 1e-6);

/// Compares reverse-mode gradients of `loss_fn` against central differences
/// with step `h` for every element of every tensor in `params`.
/// `loss_fn` must rebuild the graph on each call and be deterministic.
///
/// With `refinements` > 0, an entry whose error exceeds `retry_above` is
/// re-estimated at h/10 and 10h (then h/100 and 100h, ...) and keeps the
/// best estimate. A ReLU kink closer than h to the evaluation point corrupts
/// the larger steps only; roundoff swamps tiny gradients at the smaller
/// steps only; a wrong analytic gradient disagrees at every step.
GradCheckResult check_gradients(const std::function<Tensor<double>()>& loss_fn,
                                std::span<Tensor<double>> params, double h = 1e-3, double floor = 1e-6,
                                double retry_above = 0.0, int refinements = 0);

}  // namespace fsegan::ad
