#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace wtlstm {

/// A block of coordinates to probe: the live values the objective reads and
/// the analytic gradient of the objective with respect to them.
struct GradProbe {
  std::string name;
  std::span<double> values;
  std::span<const double> analytic;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_probe;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

/// Compares analytic gradients against central differences of `objective`.
///
/// Per coordinate the error is |a - n| / max(|a|, |n|, 1e-8). Every probed value
/// is restored after perturbation. Throws ContractError when two evaluations at
/// the same point disagree, which means the objective is not deterministic.
GradCheckResult finite_diff_check(const std::function<double()>& objective,
                                  const std::vector<GradProbe>& probes, double eps = 1e-5);

}  // namespace wtlstm
