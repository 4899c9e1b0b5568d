#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "vdrive/env.hpp"
#include "vdrive/nn/attention.hpp"
#include "vdrive/nn/layers.hpp"

namespace vdrive::nn {

/// Conv featurizer and scalar attention that map an Observation to a state
/// vector. The conv stack is conv(k×k, same) → ReLU → 2×2 max pool per stage,
/// followed by a dense layer with tanh.
struct EncoderSpec {
  std::size_t input_rows = 56;
  std::size_t input_cols = 56;
  std::size_t input_channels = 2;
  std::vector<std::size_t> conv_channels{8, 16, 32, 64};
  std::size_t kernel = 5;
  std::size_t dense_out = 32;
  std::size_t embed_size = 10;
  std::size_t attn_size = 10;
  // Scalar normalizers: x and lane extremes by frame width, f by f_max,
  // angles by 180°.
  double frame_width = 224.0;
  double f_max = 10.0;

  /// Full-resolution configuration: 224×224 input, channels 8/16/32/64.
  static EncoderSpec full_scale();

  std::size_t output_size() const { return dense_out + kScalarFeatures; }
  void validate() const;

  bool operator==(const EncoderSpec&) const = default;
};

using StateVector = std::vector<double>;

class Encoder {
 public:
  struct Tape {
    std::shared_ptr<const std::vector<double>> input;
    std::vector<std::vector<double>> conv_out;  // post-ReLU, per stage
    std::vector<std::vector<double>> pool_out;  // per stage
    std::vector<std::vector<std::size_t>> argmax;
    std::vector<double> features;               // tanh(dense)
    ScalarFeatures scalars{};
    ScalarFeatures weights{};
    ScalarAttention::Tape attention;
  };

  Encoder() = default;
  explicit Encoder(EncoderSpec spec);

  void init(Rng& rng);
  const EncoderSpec& spec() const { return spec_; }
  std::size_t output_size() const { return spec_.output_size(); }

  /// [conv features ∥ ĉ_i·s_i]. Throws std::invalid_argument when the
  /// observation channels do not match the configured input resolution.
  StateVector forward(const Observation& obs, Tape& tape) const;
  void backward(const Tape& tape, std::span<const double> grad_state);

  ScalarFeatures normalized_scalars(const Observation& obs) const;

  void collect(ParamList& params);

 private:
  EncoderSpec spec_;
  std::vector<Conv2d> convs_;
  std::vector<MaxPool2d> pools_;
  Dense fc_;
  ScalarAttention attention_;
};

/// One tanh hidden layer followed by a linear output layer.
class MlpHead {
 public:
  struct Tape {
    std::vector<double> input;
    std::vector<double> hidden;
    std::vector<double> output;
  };

  MlpHead() = default;
  MlpHead(const std::string& name, std::size_t in, std::size_t hidden, std::size_t out);

  void init(Rng& rng);
  std::size_t out_size() const { return out_.out_size(); }

  std::span<const double> forward(std::span<const double> in, Tape& tape) const;
  void backward(const Tape& tape, std::span<const double> grad_out, std::span<double> grad_in);

  void collect(ParamList& params) {
    hidden_.collect(params);
    out_.collect(params);
  }

 private:
  Dense hidden_;
  Dense out_;
};

}  // namespace vdrive::nn
