#pragma once

#include <cstdint>
#include <functional>

#include "sodbench/tensor.hpp"

namespace sodbench {

// 2-D convolution parameters. Kernels are (out_channels, in_channels, kh, kw)
// with odd kh/kw; bias is (out_channels). At stride 1, same-size output needs
// padding = dilation*(kh-1)/2 (see same_padding).
struct ConvSpec {
  Tensor kernel;
  Tensor bias;
  int stride = 1;
  int padding = 0;
  int dilation = 1;

  std::size_t out_channels() const { return kernel.extent(0); }
  std::size_t in_channels() const { return kernel.extent(1); }
  std::size_t kernel_h() const { return kernel.extent(2); }
  std::size_t kernel_w() const { return kernel.extent(3); }
};

int same_padding(int kernel_extent, int dilation);

// Validates kernel/bias shapes and hyperparameters; throws
// std::invalid_argument with the offending dimension on mismatch.
ConvSpec make_conv_spec(Tensor kernel, Tensor bias, int stride = 1,
                        int padding = 0, int dilation = 1);

// He-initialized same-padding conv: kernel (out,in,k,k), zero bias, stride 1.
ConvSpec make_he_conv(std::size_t out_ch, std::size_t in_ch, std::size_t k,
                      int dilation, std::uint64_t seed);

// Cross-correlation (no kernel flip) with zero padding over a (C,H,W) input.
// Output spatial extent: floor((H + 2p - d*(kh-1) - 1)/stride) + 1.
Tensor conv2d(const Tensor& input, const ConvSpec& spec);

// Elementwise logistic function; outputs lie strictly in (0,1).
Tensor sigmoid(const Tensor& x);
double sigmoid_scalar(double x);

// Row softmax of a (R,K) tensor with max-subtraction; each row sums to 1.
Tensor softmax_rows(const Tensor& x);

Tensor matmul(const Tensor& a, const Tensor& b);

// Per-channel mean of a (C,H,W) tensor, as (C,1,1).
Tensor global_avg_pool(const Tensor& x);

// Bilinear resampling of a (C,H,W) tensor, align-corners-false: sample
// centers at (i+0.5)*scale - 0.5, clamped to the valid coordinate range.
Tensor bilinear_resize(const Tensor& x, std::size_t out_h, std::size_t out_w);

// I.i.d. normal samples with mean 0 and variance 2/(in*kh*kw) for a
// (out,in,kh,kw) shape; deterministic for a fixed seed.
Tensor he_init(const std::vector<std::size_t>& shape, std::uint64_t seed);

// Central finite differences of a scalar-valued f, one coordinate at a time:
// (f(x+eps*e_i) - f(x-eps*e_i)) / (2*eps). Throws on non-finite evaluations.
Tensor finite_diff_grad(const std::function<double(const Tensor&)>& f,
                        const Tensor& x, double eps = 1e-5);

}  // namespace sodbench
