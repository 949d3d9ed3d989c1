#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace rtd3 {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
};

struct GradCheckOptions {
  double epsilon = 1e-5;
  // Denominator floor as a fraction of max(1, max |analytic|). Keeps
  // near-zero gradients from turning round-off into huge relative errors.
  double floor_fraction = 1e-3;
};

// |a - n| / max(|a|, |n|, floor)
double relative_error(double analytic, double numeric, double floor);

// Compares `analytic` against central differences
// (f(p + eps) - f(p - eps)) / (2 eps) for every entry of `params`. `loss`
// must evaluate the scalar loss at the current contents of `params`, which
// are restored after each probe.
GradCheckResult grad_check(std::span<double> params,
                           std::span<const double> analytic,
                           const std::function<double()>& loss,
                           const GradCheckOptions& options = {});

}  // namespace rtd3
