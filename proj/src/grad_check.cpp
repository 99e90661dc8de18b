#include "wtlstm/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "wtlstm/error.hpp"

namespace wtlstm {

GradCheckResult finite_diff_check(const std::function<double()>& objective,
                                  const std::vector<GradProbe>& probes, double eps) {
  require(eps > 0.0, "finite_diff_check: eps must be positive");
  const double base = objective();
  const double again = objective();
  if (base != again)
    throw ContractError("finite_diff_check: objective is not deterministic");

  GradCheckResult result;
  for (const auto& probe : probes) {
    require(probe.values.size() == probe.analytic.size(),
            "finite_diff_check: probe '" + probe.name + "' has mismatched gradient length");
    for (std::size_t i = 0; i < probe.values.size(); ++i) {
      const double saved = probe.values[i];
      probe.values[i] = saved + eps;
      const double plus = objective();
      probe.values[i] = saved - eps;
      const double minus = objective();
      probe.values[i] = saved;

      const double numeric = (plus - minus) / (2.0 * eps);
      const double analytic = probe.analytic[i];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      const double err = std::abs(analytic - numeric) / denom;
      if (result.worst_probe.empty() || err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst_probe = probe.name;
        result.worst_index = i;
        result.analytic = analytic;
        result.numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace wtlstm
