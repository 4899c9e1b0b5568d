#include "vdrive/nn/encoder.hpp"

#include <algorithm>
#include <stdexcept>

namespace vdrive::nn {

EncoderSpec EncoderSpec::full_scale() {
  EncoderSpec spec;
  spec.input_rows = 224;
  spec.input_cols = 224;
  return spec;
}

void EncoderSpec::validate() const {
  if (conv_channels.empty()) throw std::invalid_argument("encoder needs at least one conv stage");
  if (embed_size < 1 || attn_size < 1) throw std::invalid_argument("embed and attention sizes must be >= 1");
  if (kernel % 2 == 0) throw std::invalid_argument("conv kernel must be odd");
  if (dense_out < 1) throw std::invalid_argument("dense_out must be >= 1");
  std::size_t r = input_rows;
  std::size_t c = input_cols;
  for (std::size_t k = 0; k < conv_channels.size(); ++k) {
    if (conv_channels[k] < 1) throw std::invalid_argument("conv channel counts must be >= 1");
    r /= 2;
    c /= 2;
  }
  if (r < 1 || c < 1) throw std::invalid_argument("input resolution too small for the conv stages");
  if (!(frame_width > 0.0) || !(f_max > 0.0)) throw std::invalid_argument("normalizers must be positive");
}

Encoder::Encoder(EncoderSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  Shape3 shape{spec_.input_channels, spec_.input_rows, spec_.input_cols};
  for (std::size_t k = 0; k < spec_.conv_channels.size(); ++k) {
    convs_.emplace_back("encoder.conv" + std::to_string(k), shape, spec_.conv_channels[k],
                        spec_.kernel);
    pools_.emplace_back(convs_.back().output_shape());
    shape = pools_.back().output_shape();
  }
  fc_ = Dense("encoder.fc", shape.size(), spec_.dense_out);
  attention_ = ScalarAttention(spec_.embed_size, spec_.attn_size);
}

void Encoder::init(Rng& rng) {
  for (Conv2d& c : convs_) c.init(rng);
  fc_.init(rng);
  attention_.init(rng);
}

void Encoder::collect(ParamList& params) {
  for (Conv2d& c : convs_) c.collect(params);
  fc_.collect(params);
  attention_.collect(params);
}

ScalarFeatures Encoder::normalized_scalars(const Observation& obs) const {
  return {obs.x / spec_.frame_width, obs.f / spec_.f_max,        obs.theta / 180.0,
          obs.l_lane / spec_.frame_width, obs.r_lane / spec_.frame_width, obs.theta_lane / 180.0};
}

StateVector Encoder::forward(const Observation& obs, Tape& tape) const {
  if (!obs.channels || static_cast<std::size_t>(obs.channel_rows) != spec_.input_rows ||
      static_cast<std::size_t>(obs.channel_cols) != spec_.input_cols ||
      obs.channels->size() != spec_.input_channels * spec_.input_rows * spec_.input_cols) {
    throw std::invalid_argument("observation channels do not match the encoder input resolution");
  }
  tape.input = obs.channels;
  const std::size_t stages = convs_.size();
  tape.conv_out.resize(stages);
  tape.pool_out.resize(stages);
  tape.argmax.resize(stages);
  std::span<const double> x(*obs.channels);
  for (std::size_t k = 0; k < stages; ++k) {
    tape.conv_out[k].assign(convs_[k].output_shape().size(), 0.0);
    convs_[k].forward(x, tape.conv_out[k]);
    relu_inplace(tape.conv_out[k]);
    const std::size_t pooled = pools_[k].output_shape().size();
    tape.pool_out[k].assign(pooled, 0.0);
    tape.argmax[k].assign(pooled, 0);
    pools_[k].forward(tape.conv_out[k], tape.pool_out[k], tape.argmax[k]);
    x = tape.pool_out[k];
  }
  tape.features.assign(spec_.dense_out, 0.0);
  fc_.forward(x, tape.features);
  tanh_inplace(tape.features);

  tape.scalars = normalized_scalars(obs);
  tape.weights = attention_.forward(tape.scalars, tape.attention);

  StateVector state(output_size());
  std::copy(tape.features.begin(), tape.features.end(), state.begin());
  for (std::size_t i = 0; i < kScalarFeatures; ++i) {
    state[spec_.dense_out + i] = tape.weights[i] * tape.scalars[i];
  }
  return state;
}

void Encoder::backward(const Tape& tape, std::span<const double> grad_state) {
  // Scalar part: out_i = ĉ_i·s_i; the inputs are data, so only ĉ carries grads.
  ScalarFeatures grad_weights{};
  for (std::size_t i = 0; i < kScalarFeatures; ++i) {
    grad_weights[i] = grad_state[spec_.dense_out + i] * tape.scalars[i];
  }
  attention_.backward(tape.attention, grad_weights);

  std::vector<double> grad(grad_state.begin(), grad_state.begin() + static_cast<std::ptrdiff_t>(spec_.dense_out));
  tanh_backward(tape.features, grad);
  const std::size_t stages = convs_.size();
  std::span<const double> fc_in = tape.pool_out[stages - 1];
  std::vector<double> grad_pool(fc_in.size(), 0.0);
  fc_.backward(fc_in, grad, grad_pool);

  for (std::size_t k = stages; k-- > 0;) {
    std::vector<double> grad_conv(tape.conv_out[k].size(), 0.0);
    pools_[k].backward(tape.argmax[k], grad_pool, grad_conv);
    relu_backward(tape.conv_out[k], grad_conv);
    std::span<const double> conv_in =
        k == 0 ? std::span<const double>(*tape.input) : std::span<const double>(tape.pool_out[k - 1]);
    if (k == 0) {
      convs_[k].backward(conv_in, grad_conv, {});
    } else {
      grad_pool.assign(conv_in.size(), 0.0);
      convs_[k].backward(conv_in, grad_conv, grad_pool);
    }
  }
}

MlpHead::MlpHead(const std::string& name, std::size_t in, std::size_t hidden, std::size_t out)
    : hidden_(name + ".hidden", in, hidden), out_(name + ".out", hidden, out) {}

void MlpHead::init(Rng& rng) {
  hidden_.init(rng);
  out_.init(rng);
}

std::span<const double> MlpHead::forward(std::span<const double> in, Tape& tape) const {
  tape.input.assign(in.begin(), in.end());
  tape.hidden.assign(hidden_.out_size(), 0.0);
  hidden_.forward(tape.input, tape.hidden);
  tanh_inplace(tape.hidden);
  tape.output.assign(out_.out_size(), 0.0);
  out_.forward(tape.hidden, tape.output);
  return tape.output;
}

void MlpHead::backward(const Tape& tape, std::span<const double> grad_out,
                       std::span<double> grad_in) {
  std::vector<double> grad_hidden(tape.hidden.size(), 0.0);
  out_.backward(tape.hidden, grad_out, grad_hidden);
  tanh_backward(tape.hidden, grad_hidden);
  hidden_.backward(tape.input, grad_hidden, grad_in);
}

}  // namespace vdrive::nn
