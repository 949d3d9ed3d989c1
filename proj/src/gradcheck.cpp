#include "rtd3/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rtd3/error.hpp"

namespace rtd3 {

double relative_error(double analytic, double numeric, double floor) {
  const double denom =
      std::max({std::abs(analytic), std::abs(numeric), floor});
  return denom == 0.0 ? 0.0 : std::abs(analytic - numeric) / denom;
}

GradCheckResult grad_check(std::span<double> params,
                           std::span<const double> analytic,
                           const std::function<double()>& loss,
                           const GradCheckOptions& options) {
  if (params.size() != analytic.size()) {
    throw ContractViolation("grad_check: gradient size mismatch");
  }
  double scale = 1.0;
  for (double g : analytic) scale = std::max(scale, std::abs(g));
  const double floor = options.floor_fraction * scale;
  const double eps = options.epsilon;

  GradCheckResult result;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + eps;
    const double up = loss();
    params[i] = saved - eps;
    const double down = loss();
    params[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericFault("grad_check: non-finite loss probing parameter " +
                         std::to_string(i));
    }
    const double numeric = (up - down) / (2.0 * eps);
    const double err = relative_error(analytic[i], numeric, floor);
    if (err > result.max_rel_error || result.checked == 0) {
      result.max_rel_error = err;
      result.worst_index = i;
      result.worst_analytic = analytic[i];
      result.worst_numeric = numeric;
    }
    ++result.checked;
  }
  return result;
}

}  // namespace rtd3
