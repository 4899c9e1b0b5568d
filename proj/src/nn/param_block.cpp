#include "vdrive/nn/param_block.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "vdrive/simd/kernels.hpp"

namespace vdrive::nn {

ParamBlock::ParamBlock(std::string block_name, std::vector<std::size_t> block_shape)
    : name(std::move(block_name)), shape(std::move(block_shape)) {
  const std::size_t n = std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                                        std::multiplies<std::size_t>());
  values.assign(n, 0.0);
  grads.assign(n, 0.0);
}

void ParamBlock::zero_grad() { std::fill(grads.begin(), grads.end(), 0.0); }

void ParamBlock::init_uniform(double bound, Rng& rng) {
  for (double& v : values) v = rng.uniform(-bound, bound);
}

bool ParamBlock::all_finite() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); }) &&
         std::all_of(grads.begin(), grads.end(), [](double v) { return std::isfinite(v); });
}

void sgd_update(ParamBlock& block, double lr, Direction direction) {
  const double step = direction == Direction::kAscent ? lr : -lr;
  simd::axpy(step, block.grads, block.values);
  block.zero_grad();
}

void sgd_update(std::span<ParamBlock* const> blocks, double lr, Direction direction) {
  for (ParamBlock* b : blocks) sgd_update(*b, lr, direction);
}

void zero_grads(std::span<ParamBlock* const> blocks) {
  for (ParamBlock* b : blocks) b->zero_grad();
}

void check_finite(std::span<ParamBlock* const> blocks) {
  for (const ParamBlock* b : blocks) {
    if (!b->all_finite()) throw NumericError("non-finite entry in parameter block " + b->name);
  }
}

}  // namespace vdrive::nn
