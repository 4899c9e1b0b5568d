#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "vdrive/nn/param_block.hpp"
#include "vdrive/rng.hpp"

namespace vdrive::nn {

inline constexpr std::size_t kScalarFeatures = 6;

using ScalarFeatures = std::array<double, kScalarFeatures>;

/// Softmax attention over the scalar state features. Every scalar s_i is
/// embedded as s_i·E (E ∈ R^e), scored c_i = Vᵀ tanh(W·(s_i·E) + b), and the
/// weights are softmax(c). E, W, b, V are shared across the six features.
class ScalarAttention {
 public:
  struct Tape {
    ScalarFeatures input{};
    std::vector<double> hidden;  // tanh activations, [6, d]
    ScalarFeatures scores{};
    ScalarFeatures weights{};
  };

  ScalarAttention() = default;
  ScalarAttention(std::size_t embed_size, std::size_t attn_size);

  void init(Rng& rng);

  ScalarFeatures forward(const ScalarFeatures& s, Tape& tape) const;
  /// Returns the gradient w.r.t. the six inputs; parameter grads accumulate.
  ScalarFeatures backward(const Tape& tape, const ScalarFeatures& grad_weights);

  void collect(ParamList& params) {
    params.push_back(&embed);
    params.push_back(&w);
    params.push_back(&b);
    params.push_back(&v);
  }

  std::size_t embed_size() const { return e_; }
  std::size_t attn_size() const { return d_; }

  ParamBlock embed;  // E  [e]
  ParamBlock w;      // W  [d, e]
  ParamBlock b;      // b  [d]
  ParamBlock v;      // V  [d]

 private:
  std::size_t e_ = 0;
  std::size_t d_ = 0;
};

}  // namespace vdrive::nn
