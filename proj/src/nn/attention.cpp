#include "vdrive/nn/attention.hpp"

#include <algorithm>
#include <cmath>

namespace vdrive::nn {

ScalarAttention::ScalarAttention(std::size_t embed_size, std::size_t attn_size)
    : embed("attention.embed", {embed_size}),
      w("attention.W", {attn_size, embed_size}),
      b("attention.b", {attn_size}),
      v("attention.V", {attn_size}),
      e_(embed_size),
      d_(attn_size) {}

void ScalarAttention::init(Rng& rng) {
  embed.init_uniform(1.0, rng);
  w.init_uniform(1.0 / std::sqrt(static_cast<double>(e_)), rng);
  b.init_uniform(1.0 / std::sqrt(static_cast<double>(e_)), rng);
  v.init_uniform(1.0 / std::sqrt(static_cast<double>(d_)), rng);
}

ScalarFeatures ScalarAttention::forward(const ScalarFeatures& s, Tape& tape) const {
  tape.input = s;
  tape.hidden.assign(kScalarFeatures * d_, 0.0);
  for (std::size_t i = 0; i < kScalarFeatures; ++i) {
    double score = 0.0;
    for (std::size_t r = 0; r < d_; ++r) {
      double z = b.values[r];
      for (std::size_t c = 0; c < e_; ++c) z += w.values[r * e_ + c] * s[i] * embed.values[c];
      const double h = std::tanh(z);
      tape.hidden[i * d_ + r] = h;
      score += v.values[r] * h;
    }
    tape.scores[i] = score;
  }
  const double peak = *std::max_element(tape.scores.begin(), tape.scores.end());
  double norm = 0.0;
  for (std::size_t i = 0; i < kScalarFeatures; ++i) {
    tape.weights[i] = std::exp(tape.scores[i] - peak);
    norm += tape.weights[i];
  }
  for (double& c : tape.weights) c /= norm;
  return tape.weights;
}

ScalarFeatures ScalarAttention::backward(const Tape& tape, const ScalarFeatures& grad_weights) {
  double mean = 0.0;
  for (std::size_t i = 0; i < kScalarFeatures; ++i) mean += grad_weights[i] * tape.weights[i];

  ScalarFeatures grad_input{};
  std::vector<double> grad_z(d_);
  for (std::size_t i = 0; i < kScalarFeatures; ++i) {
    const double grad_score = tape.weights[i] * (grad_weights[i] - mean);
    const double s = tape.input[i];
    for (std::size_t r = 0; r < d_; ++r) {
      const double h = tape.hidden[i * d_ + r];
      v.grads[r] += grad_score * h;
      grad_z[r] = grad_score * v.values[r] * (1.0 - h * h);
      b.grads[r] += grad_z[r];
    }
    // z_r = Σ_c W[r,c]·s·E[c]
    for (std::size_t c = 0; c < e_; ++c) {
      double wt_gz = 0.0;
      for (std::size_t r = 0; r < d_; ++r) {
        w.grads[r * e_ + c] += grad_z[r] * s * embed.values[c];
        wt_gz += w.values[r * e_ + c] * grad_z[r];
      }
      embed.grads[c] += wt_gz * s;
      grad_input[i] += wt_gz * embed.values[c];
    }
  }
  return grad_input;
}

}  // namespace vdrive::nn
