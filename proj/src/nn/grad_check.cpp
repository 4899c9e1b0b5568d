#include "vdrive/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace vdrive::nn {

double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), kGradCheckFloor});
  return std::abs(analytic - numeric) / scale;
}

GradCheckReport grad_check(const Objective& objective, std::span<ParamBlock* const> params,
                           double eps) {
  return grad_check(objective, params, std::span<const double>(&eps, 1));
}

GradCheckReport grad_check(const Objective& objective, std::span<ParamBlock* const> params,
                           std::span<const double> steps) {
  if (steps.empty()) throw std::invalid_argument("grad_check needs at least one step size");
  for (double eps : steps) {
    if (!(eps >= 1e-7 && eps <= 1e-3)) throw std::invalid_argument("grad_check eps must lie in [1e-7, 1e-3]");
  }
  auto evaluate = [&](bool accumulate) {
    const double v = objective(accumulate);
    if (!std::isfinite(v)) throw NumericError("grad_check: objective is not finite");
    return v;
  };

  zero_grads(params);
  evaluate(true);
  std::vector<std::vector<double>> analytic;
  for (ParamBlock* b : params) analytic.push_back(b->grads);
  zero_grads(params);

  GradCheckReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    ParamBlock& block = *params[k];
    for (std::size_t i = 0; i < block.size(); ++i) {
      const double saved = block.values[i];
      double best_err = 0.0;
      double best_numeric = 0.0;
      for (std::size_t s = 0; s < steps.size(); ++s) {
        const double eps = steps[s];
        block.values[i] = saved + eps;
        const double up = evaluate(false);
        block.values[i] = saved - eps;
        const double down = evaluate(false);
        block.values[i] = saved;
        const double numeric = (up - down) / (2.0 * eps);
        const double err = relative_error(analytic[k][i], numeric);
        if (s == 0 || err < best_err) {
          best_err = err;
          best_numeric = numeric;
        }
      }
      ++report.coordinates;
      if (best_err > report.max_rel_error || report.coordinates == 1) {
        report.max_rel_error = best_err;
        report.worst_block = block.name;
        report.worst_index = i;
        report.analytic = analytic[k][i];
        report.numeric = best_numeric;
      }
    }
  }
  return report;
}

}  // namespace vdrive::nn
