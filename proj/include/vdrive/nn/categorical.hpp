#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vdrive/nn/encoder.hpp"
#include "vdrive/rng.hpp"

namespace vdrive::nn {

/// Softmax distribution over logits, kept in log space.
class Categorical {
 public:
  explicit Categorical(std::span<const double> logits);

  std::size_t size() const { return log_probs_.size(); }
  double log_prob(std::size_t k) const { return log_probs_.at(k); }
  std::vector<double> probs() const;

  std::size_t sample(Rng& rng) const;
  /// Lowest index among the maximal logits.
  std::size_t argmax() const;

  /// grad_logits += weight·(onehot(k) − p), the gradient of weight·log p_k.
  void accumulate_log_prob_grad(std::size_t k, double weight, std::span<double> grad_logits) const;

 private:
  std::vector<double> log_probs_;
};

std::vector<double> log_softmax(std::span<const double> logits);

/// Runs a policy head on a state vector.
Categorical policy_forward(std::span<const double> state, const MlpHead& head, MlpHead::Tape& tape);

}  // namespace vdrive::nn
