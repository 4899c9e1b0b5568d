#include "vdrive/nn/layers.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "vdrive/simd/kernels.hpp"

namespace vdrive::nn {

Dense::Dense(const std::string& name, std::size_t in, std::size_t out)
    : weight(name + ".weight", {out, in}), bias(name + ".bias", {out}), in_(in), out_(out) {}

void Dense::init(Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_));
  weight.init_uniform(bound, rng);
  bias.init_uniform(bound, rng);
}

void Dense::forward(std::span<const double> in, std::span<double> out) const {
  assert(in.size() == in_ && out.size() == out_);
  const std::span<const double> w(weight.values);
  for (std::size_t o = 0; o < out_; ++o) {
    out[o] = simd::dot(w.subspan(o * in_, in_), in) + bias.values[o];
  }
}

void Dense::backward(std::span<const double> in, std::span<const double> grad_out,
                     std::span<double> grad_in) {
  assert(in.size() == in_ && grad_out.size() == out_);
  const std::span<double> gw(weight.grads);
  const std::span<const double> w(weight.values);
  for (std::size_t o = 0; o < out_; ++o) {
    const double g = grad_out[o];
    if (g == 0.0) continue;
    simd::axpy(g, in, gw.subspan(o * in_, in_));
    bias.grads[o] += g;
    if (!grad_in.empty()) simd::axpy(g, w.subspan(o * in_, in_), grad_in);
  }
}

Conv2d::Conv2d(const std::string& name, Shape3 input, std::size_t out_channels,
               std::size_t kernel)
    : weight(name + ".weight", {out_channels, input.channels, kernel, kernel}),
      bias(name + ".bias", {out_channels}),
      in_(input),
      out_channels_(out_channels),
      kernel_(kernel) {
  assert(kernel % 2 == 1);
}

void Conv2d::init(Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_.channels * kernel_ * kernel_));
  weight.init_uniform(bound, rng);
  bias.init_uniform(bound, rng);
}

namespace {

// Valid output range [lo, hi) along one axis for a tap at offset d.
inline void tap_range(std::ptrdiff_t d, std::size_t n, std::size_t& lo, std::size_t& hi) {
  const auto sn = static_cast<std::ptrdiff_t>(n);
  lo = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, -d));
  hi = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(sn - d, 0, sn));
}

}  // namespace

void Conv2d::forward(std::span<const double> in, std::span<double> out) const {
  assert(in.size() == in_.size() && out.size() == output_shape().size());
  const std::size_t plane = in_.rows * in_.cols;
  const auto pad = static_cast<std::ptrdiff_t>(kernel_ / 2);
  for (std::size_t oc = 0; oc < out_channels_; ++oc) {
    std::span<double> out_plane = out.subspan(oc * plane, plane);
    std::fill(out_plane.begin(), out_plane.end(), bias.values[oc]);
    for (std::size_t ic = 0; ic < in_.channels; ++ic) {
      std::span<const double> in_plane = in.subspan(ic * plane, plane);
      for (std::size_t ky = 0; ky < kernel_; ++ky) {
        const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - pad;
        std::size_t y0, y1;
        tap_range(dy, in_.rows, y0, y1);
        for (std::size_t kx = 0; kx < kernel_; ++kx) {
          const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - pad;
          std::size_t x0, x1;
          tap_range(dx, in_.cols, x0, x1);
          if (x0 >= x1) continue;
          const double w =
              weight.values[((oc * in_.channels + ic) * kernel_ + ky) * kernel_ + kx];
          for (std::size_t y = y0; y < y1; ++y) {
            const std::size_t src = (y + dy) * in_.cols + (x0 + dx);
            simd::axpy(w, in_plane.subspan(src, x1 - x0),
                       out_plane.subspan(y * in_.cols + x0, x1 - x0));
          }
        }
      }
    }
  }
}

void Conv2d::backward(std::span<const double> in, std::span<const double> grad_out,
                      std::span<double> grad_in) {
  assert(in.size() == in_.size() && grad_out.size() == output_shape().size());
  const std::size_t plane = in_.rows * in_.cols;
  const auto pad = static_cast<std::ptrdiff_t>(kernel_ / 2);
  for (std::size_t oc = 0; oc < out_channels_; ++oc) {
    std::span<const double> g_plane = grad_out.subspan(oc * plane, plane);
    bias.grads[oc] += simd::sum(g_plane);
    for (std::size_t ic = 0; ic < in_.channels; ++ic) {
      std::span<const double> in_plane = in.subspan(ic * plane, plane);
      for (std::size_t ky = 0; ky < kernel_; ++ky) {
        const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - pad;
        std::size_t y0, y1;
        tap_range(dy, in_.rows, y0, y1);
        for (std::size_t kx = 0; kx < kernel_; ++kx) {
          const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - pad;
          std::size_t x0, x1;
          tap_range(dx, in_.cols, x0, x1);
          if (x0 >= x1) continue;
          const std::size_t widx = ((oc * in_.channels + ic) * kernel_ + ky) * kernel_ + kx;
          const double w = weight.values[widx];
          double acc = 0.0;
          for (std::size_t y = y0; y < y1; ++y) {
            const std::size_t src = (y + dy) * in_.cols + (x0 + dx);
            const auto g_row = g_plane.subspan(y * in_.cols + x0, x1 - x0);
            acc += simd::dot(g_row, in_plane.subspan(src, x1 - x0));
            if (!grad_in.empty()) simd::axpy(w, g_row, grad_in.subspan(ic * plane + src, x1 - x0));
          }
          weight.grads[widx] += acc;
        }
      }
    }
  }
}

void MaxPool2d::forward(std::span<const double> in, std::span<double> out,
                        std::span<std::size_t> argmax) const {
  const Shape3 os = output_shape();
  assert(in.size() == in_.size() && out.size() == os.size() && argmax.size() == os.size());
  for (std::size_t c = 0; c < os.channels; ++c) {
    for (std::size_t r = 0; r < os.rows; ++r) {
      for (std::size_t q = 0; q < os.cols; ++q) {
        std::size_t best = (c * in_.rows + 2 * r) * in_.cols + 2 * q;
        for (std::size_t dy = 0; dy < 2; ++dy) {
          for (std::size_t dx = 0; dx < 2; ++dx) {
            const std::size_t idx = (c * in_.rows + 2 * r + dy) * in_.cols + 2 * q + dx;
            if (in[idx] > in[best]) best = idx;
          }
        }
        const std::size_t o = (c * os.rows + r) * os.cols + q;
        out[o] = in[best];
        argmax[o] = best;
      }
    }
  }
}

void MaxPool2d::backward(std::span<const std::size_t> argmax, std::span<const double> grad_out,
                         std::span<double> grad_in) const {
  for (std::size_t o = 0; o < grad_out.size(); ++o) grad_in[argmax[o]] += grad_out[o];
}

void relu_inplace(std::span<double> x) {
  for (double& v : x) v = v > 0.0 ? v : 0.0;
}

void relu_backward(std::span<const double> out, std::span<double> grad) {
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!(out[i] > 0.0)) grad[i] = 0.0;
  }
}

void tanh_inplace(std::span<double> x) {
  for (double& v : x) v = std::tanh(v);
}

void tanh_backward(std::span<const double> out, std::span<double> grad) {
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] *= 1.0 - out[i] * out[i];
}

}  // namespace vdrive::nn
