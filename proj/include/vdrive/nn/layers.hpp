#pragma once

// Stateless layers: forward writes its output, backward takes the forward
// input (and, where needed, output) back from the caller and accumulates
// parameter gradients and input gradients (+=).

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "vdrive/nn/param_block.hpp"
#include "vdrive/rng.hpp"

namespace vdrive::nn {

struct Shape3 {
  std::size_t channels = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const { return channels * rows * cols; }
  bool operator==(const Shape3&) const = default;
};

class Dense {
 public:
  Dense() = default;
  Dense(const std::string& name, std::size_t in, std::size_t out);

  void init(Rng& rng);
  std::size_t in_size() const { return in_; }
  std::size_t out_size() const { return out_; }

  void forward(std::span<const double> in, std::span<double> out) const;
  /// grad_in may be empty when the input gradient is not needed.
  void backward(std::span<const double> in, std::span<const double> grad_out,
                std::span<double> grad_in);

  void collect(ParamList& params) { params.push_back(&weight); params.push_back(&bias); }

  ParamBlock weight;  // [out, in]
  ParamBlock bias;    // [out]

 private:
  std::size_t in_ = 0;
  std::size_t out_ = 0;
};

/// Stride-1 convolution with zero "same" padding (odd kernel).
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(const std::string& name, Shape3 input, std::size_t out_channels, std::size_t kernel);

  void init(Rng& rng);
  Shape3 input_shape() const { return in_; }
  Shape3 output_shape() const { return {out_channels_, in_.rows, in_.cols}; }

  void forward(std::span<const double> in, std::span<double> out) const;
  void backward(std::span<const double> in, std::span<const double> grad_out,
                std::span<double> grad_in);

  void collect(ParamList& params) { params.push_back(&weight); params.push_back(&bias); }

  ParamBlock weight;  // [out_c, in_c, k, k]
  ParamBlock bias;    // [out_c]

 private:
  Shape3 in_;
  std::size_t out_channels_ = 0;
  std::size_t kernel_ = 0;
};

/// Non-overlapping 2×2 max pooling; odd trailing rows/columns are dropped.
class MaxPool2d {
 public:
  MaxPool2d() = default;
  explicit MaxPool2d(Shape3 input) : in_(input) {}

  Shape3 input_shape() const { return in_; }
  Shape3 output_shape() const { return {in_.channels, in_.rows / 2, in_.cols / 2}; }

  /// argmax receives, per output cell, the flat input index that won.
  void forward(std::span<const double> in, std::span<double> out,
               std::span<std::size_t> argmax) const;
  void backward(std::span<const std::size_t> argmax, std::span<const double> grad_out,
                std::span<double> grad_in) const;

 private:
  Shape3 in_;
};

void relu_inplace(std::span<double> x);
/// grad *= (out > 0)
void relu_backward(std::span<const double> out, std::span<double> grad);
void tanh_inplace(std::span<double> x);
/// grad *= 1 − out²
void tanh_backward(std::span<const double> out, std::span<double> grad);

}  // namespace vdrive::nn
