#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vdrive/rng.hpp"

namespace vdrive::nn {

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A flat learnable tensor with a same-shaped gradient buffer. Gradients
/// accumulate until zero_grad() (or an sgd_update) clears them.
struct ParamBlock {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> values;
  std::vector<double> grads;

  ParamBlock() = default;
  ParamBlock(std::string block_name, std::vector<std::size_t> block_shape);

  std::size_t size() const { return values.size(); }
  void zero_grad();
  /// Uniform in [−bound, bound].
  void init_uniform(double bound, Rng& rng);
  bool all_finite() const;
};

using ParamList = std::vector<ParamBlock*>;

enum class Direction { kAscent, kDescent };

/// values ± lr·grads, then grads are zeroed.
void sgd_update(ParamBlock& block, double lr, Direction direction);
void sgd_update(std::span<ParamBlock* const> blocks, double lr, Direction direction);

void zero_grads(std::span<ParamBlock* const> blocks);

/// Throws NumericError naming the first block with a non-finite value.
void check_finite(std::span<ParamBlock* const> blocks);

}  // namespace vdrive::nn
