#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>

#include "vdrive/nn/param_block.hpp"

namespace vdrive::nn {

/// Evaluates a scalar objective at the current parameter values. When
/// accumulate is true it must also add its gradient into the blocks' grads.
using Objective = std::function<double(bool accumulate)>;

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_block;
  std::size_t worst_index = 0;
  double analytic = 0.0;  // at the worst coordinate
  double numeric = 0.0;
  std::size_t coordinates = 0;
};

/// Magnitudes below this are compared absolutely rather than relatively.
inline constexpr double kGradCheckFloor = 1e-6;

/// |a − n| / max(|a|, |n|, kGradCheckFloor)
double relative_error(double analytic, double numeric);

/// Compares reverse-mode gradients with central differences
/// (f(p+ε) − f(p−ε)) / 2ε over every coordinate of every block.
/// Requires ε ∈ [1e-7, 1e-3]; throws NumericError on a non-finite value.
GradCheckReport grad_check(const Objective& objective, std::span<ParamBlock* const> params,
                           double eps = 1e-6);

/// Same comparison at several step sizes, keeping the best agreement per
/// coordinate. Large steps suppress roundoff on tiny gradients; small steps
/// avoid straddling ReLU and max-pool switch points. A wrong gradient
/// disagrees at every step.
GradCheckReport grad_check(const Objective& objective, std::span<ParamBlock* const> params,
                           std::span<const double> steps);

}  // namespace vdrive::nn
