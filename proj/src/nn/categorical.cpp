#include "vdrive/nn/categorical.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vdrive::nn {

std::vector<double> log_softmax(std::span<const double> logits) {
  if (logits.empty()) throw std::invalid_argument("log_softmax of an empty vector");
  const double peak = *std::max_element(logits.begin(), logits.end());
  double norm = 0.0;
  for (double z : logits) norm += std::exp(z - peak);
  const double log_norm = peak + std::log(norm);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - log_norm;
  return out;
}

Categorical::Categorical(std::span<const double> logits) : log_probs_(log_softmax(logits)) {}

std::vector<double> Categorical::probs() const {
  std::vector<double> p(log_probs_.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::exp(log_probs_[i]);
  return p;
}

std::size_t Categorical::sample(Rng& rng) const {
  const double u = rng.uniform();
  double cdf = 0.0;
  for (std::size_t i = 0; i < log_probs_.size(); ++i) {
    cdf += std::exp(log_probs_[i]);
    if (u < cdf) return i;
  }
  // Rounding left cdf just below 1; fall back to the last category with mass.
  for (std::size_t i = log_probs_.size(); i-- > 0;) {
    if (std::exp(log_probs_[i]) > 0.0) return i;
  }
  return log_probs_.size() - 1;
}

std::size_t Categorical::argmax() const {
  return static_cast<std::size_t>(
      std::distance(log_probs_.begin(), std::max_element(log_probs_.begin(), log_probs_.end())));
}

void Categorical::accumulate_log_prob_grad(std::size_t k, double weight,
                                           std::span<double> grad_logits) const {
  for (std::size_t i = 0; i < log_probs_.size(); ++i) {
    grad_logits[i] -= weight * std::exp(log_probs_[i]);
  }
  grad_logits[k] += weight;
}

Categorical policy_forward(std::span<const double> state, const MlpHead& head,
                           MlpHead::Tape& tape) {
  return Categorical(head.forward(state, tape));
}

}  // namespace vdrive::nn
