#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace fsegan::testing {

inline constexpr double kGradTol = 1e-4;   // finite-difference relative error bound
inline constexpr double kGradStep = 1e-5;  // central-difference step

/// Worst outcome for one op (or one full loss) over its randomized trials.
struct OpCheck {
  std::string op;
  std::size_t trials = 0;
  std::size_t checked = 0;  // scalar entries compared, summed over trials
  std::size_t refined = 0;  // entries re-estimated at other steps
  double max_rel_error = 0.0;
  std::string worst;  // summary of the worst trial

  bool ok() const { return checked > 0 && max_rel_error < kGradTol; }
};

/// Every differentiable op and loss, `trials` random shapes each.
std::vector<OpCheck> gradcheck_ops(std::size_t trials, std::uint64_t seed);

/// Full generator objectives (adversarial + 100 * L1) for both model
/// families, `shapes` random miniature configurations each. An entry that
/// misses the bound at kGradStep is retried at kGradStep / 10 and 10 kGradStep.
std::vector<OpCheck> gradcheck_generator_losses(std::size_t shapes, std::uint64_t seed);

}  // namespace fsegan::testing
