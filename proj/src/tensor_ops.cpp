#include "sodbench/tensor_ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sodbench/rng.hpp"

namespace sodbench {

int same_padding(int kernel_extent, int dilation) {
  return dilation * (kernel_extent - 1) / 2;
}

ConvSpec make_conv_spec(Tensor kernel, Tensor bias, int stride, int padding,
                        int dilation) {
  require_rank(kernel, 4, "conv kernel");
  require_rank(bias, 1, "conv bias");
  if (bias.extent(0) != kernel.extent(0)) {
    throw std::invalid_argument(
        "conv bias extent " + std::to_string(bias.extent(0)) +
        " does not match out_channels " + std::to_string(kernel.extent(0)));
  }
  if (kernel.extent(2) % 2 == 0 || kernel.extent(3) % 2 == 0) {
    throw std::invalid_argument("conv kernel extents must be odd, got " +
                                shape_to_string(kernel.shape()));
  }
  if (stride < 1) throw std::invalid_argument("conv stride must be >= 1");
  if (padding < 0) throw std::invalid_argument("conv padding must be >= 0");
  if (dilation < 1) throw std::invalid_argument("conv dilation must be >= 1");
  return ConvSpec{std::move(kernel), std::move(bias), stride, padding,
                  dilation};
}

ConvSpec make_he_conv(std::size_t out_ch, std::size_t in_ch, std::size_t k,
                      int dilation, std::uint64_t seed) {
  Tensor kernel = he_init({out_ch, in_ch, k, k}, seed);
  Tensor bias({out_ch});
  return make_conv_spec(std::move(kernel), std::move(bias), 1,
                        same_padding(static_cast<int>(k), dilation), dilation);
}

Tensor conv2d(const Tensor& input, const ConvSpec& spec) {
  require_rank(input, 3, "conv2d input");
  const std::size_t c_in = input.extent(0);
  const std::size_t h = input.extent(1);
  const std::size_t w = input.extent(2);
  if (c_in != spec.in_channels()) {
    throw std::invalid_argument(
        "conv2d: input has " + std::to_string(c_in) +
        " channels but kernel expects " + std::to_string(spec.in_channels()));
  }
  const int kh = static_cast<int>(spec.kernel_h());
  const int kw = static_cast<int>(spec.kernel_w());
  const long span_h = static_cast<long>(h) + 2L * spec.padding -
                      static_cast<long>(spec.dilation) * (kh - 1) - 1;
  const long span_w = static_cast<long>(w) + 2L * spec.padding -
                      static_cast<long>(spec.dilation) * (kw - 1) - 1;
  if (span_h < 0 || span_w < 0) {
    throw std::invalid_argument("conv2d: kernel footprint exceeds padded "
                                "input " + shape_to_string(input.shape()));
  }
  const std::size_t out_h = static_cast<std::size_t>(span_h / spec.stride) + 1;
  const std::size_t out_w = static_cast<std::size_t>(span_w / spec.stride) + 1;
  const std::size_t n = out_h * out_w;
  const std::size_t patch = c_in * static_cast<std::size_t>(kh) *
                            static_cast<std::size_t>(kw);

  // im2col: gather each receptive field into a (patch, N) column matrix,
  // then the convolution is one matrix product against the kernel rows.
  Tensor columns({patch, n});
  std::size_t row = 0;
  for (std::size_t ic = 0; ic < c_in; ++ic) {
    for (int ky = 0; ky < kh; ++ky) {
      for (int kx = 0; kx < kw; ++kx, ++row) {
        double* dst = columns.data().data() + row * n;
        std::size_t col = 0;
        for (std::size_t oy = 0; oy < out_h; ++oy) {
          const long iy = static_cast<long>(oy) * spec.stride - spec.padding +
                          static_cast<long>(ky) * spec.dilation;
          for (std::size_t ox = 0; ox < out_w; ++ox, ++col) {
            const long ix = static_cast<long>(ox) * spec.stride -
                            spec.padding + static_cast<long>(kx) * spec.dilation;
            const bool inside = iy >= 0 && iy < static_cast<long>(h) &&
                                ix >= 0 && ix < static_cast<long>(w);
            dst[col] = inside ? input.at(ic, static_cast<std::size_t>(iy),
                                         static_cast<std::size_t>(ix))
                              : 0.0;
          }
        }
      }
    }
  }

  Tensor flat_kernel({spec.out_channels(), patch}, spec.kernel.data());
  Tensor product = matmul(flat_kernel, columns);
  Tensor out({spec.out_channels(), out_h, out_w});
  for (std::size_t oc = 0; oc < spec.out_channels(); ++oc) {
    const double b = spec.bias[oc];
    for (std::size_t i = 0; i < n; ++i) {
      out[oc * n + i] = product[oc * n + i] + b;
    }
  }
  return out;
}

double sigmoid_scalar(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Tensor sigmoid(const Tensor& x) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = sigmoid_scalar(x[i]);
  return Tensor(x.shape(), std::move(out));
}

Tensor softmax_rows(const Tensor& x) {
  require_rank(x, 2, "softmax input");
  const std::size_t rows = x.extent(0);
  const std::size_t cols = x.extent(1);
  Tensor out(x.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* src = x.data().data() + r * cols;
    double* dst = out.data().data() + r * cols;
    double m = src[0];
    for (std::size_t c = 1; c < cols; ++c) m = std::max(m, src[c]);
    double sum = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      dst[c] = std::exp(src[c] - m);
      sum += dst[c];
    }
    for (std::size_t c = 0; c < cols; ++c) dst[c] /= sum;
  }
  return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul lhs");
  require_rank(b, 2, "matmul rhs");
  if (a.extent(1) != b.extent(0)) {
    throw std::invalid_argument("matmul: inner extents disagree, " +
                                shape_to_string(a.shape()) + " x " +
                                shape_to_string(b.shape()));
  }
  const std::size_t m = a.extent(0);
  const std::size_t k = a.extent(1);
  const std::size_t n = b.extent(1);
  Tensor out({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    double* dst = out.data().data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      const double* src = b.data().data() + p * n;
      for (std::size_t j = 0; j < n; ++j) dst[j] += av * src[j];
    }
  }
  return out;
}

Tensor global_avg_pool(const Tensor& x) {
  require_rank(x, 3, "global_avg_pool input");
  const std::size_t c = x.extent(0);
  const std::size_t hw = x.extent(1) * x.extent(2);
  Tensor out({c, 1, 1});
  for (std::size_t ch = 0; ch < c; ++ch) {
    double sum = 0.0;
    const double* src = x.data().data() + ch * hw;
    for (std::size_t i = 0; i < hw; ++i) sum += src[i];
    out[ch] = sum / static_cast<double>(hw);
  }
  return out;
}

namespace {

struct SampleAxis {
  std::size_t lo;
  std::size_t hi;
  double frac;
};

SampleAxis source_coord(std::size_t i, std::size_t in_extent,
                        std::size_t out_extent) {
  const double scale =
      static_cast<double>(in_extent) / static_cast<double>(out_extent);
  double src = (static_cast<double>(i) + 0.5) * scale - 0.5;
  src = std::clamp(src, 0.0, static_cast<double>(in_extent - 1));
  const std::size_t lo = static_cast<std::size_t>(src);
  const std::size_t hi = std::min(lo + 1, in_extent - 1);
  return SampleAxis{lo, hi, src - static_cast<double>(lo)};
}

}  // namespace

Tensor bilinear_resize(const Tensor& x, std::size_t out_h, std::size_t out_w) {
  require_rank(x, 3, "bilinear_resize input");
  if (out_h == 0 || out_w == 0) {
    throw std::invalid_argument("bilinear_resize: target extents must be >= 1");
  }
  const std::size_t c = x.extent(0);
  const std::size_t h = x.extent(1);
  const std::size_t w = x.extent(2);
  if (out_h == h && out_w == w) return x;

  std::vector<SampleAxis> ys(out_h), xs(out_w);
  for (std::size_t i = 0; i < out_h; ++i) ys[i] = source_coord(i, h, out_h);
  for (std::size_t j = 0; j < out_w; ++j) xs[j] = source_coord(j, w, out_w);

  Tensor out({c, out_h, out_w});
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t i = 0; i < out_h; ++i) {
      const SampleAxis& ya = ys[i];
      for (std::size_t j = 0; j < out_w; ++j) {
        const SampleAxis& xa = xs[j];
        const double top = x.at(ch, ya.lo, xa.lo) * (1.0 - xa.frac) +
                           x.at(ch, ya.lo, xa.hi) * xa.frac;
        const double bot = x.at(ch, ya.hi, xa.lo) * (1.0 - xa.frac) +
                           x.at(ch, ya.hi, xa.hi) * xa.frac;
        out.at(ch, i, j) = top * (1.0 - ya.frac) + bot * ya.frac;
      }
    }
  }
  return out;
}

Tensor he_init(const std::vector<std::size_t>& shape, std::uint64_t seed) {
  if (shape.size() != 4) {
    throw std::invalid_argument("he_init expects an (out,in,kh,kw) shape, got " +
                                shape_to_string(shape));
  }
  const std::size_t fan_in = shape[1] * shape[2] * shape[3];
  const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
  Rng rng(seed);
  Tensor out(shape);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = rng.normal(0.0, stddev);
  return out;
}

Tensor finite_diff_grad(const std::function<double(const Tensor&)>& f,
                        const Tensor& x, double eps) {
  if (!(eps > 0.0)) {
    throw std::invalid_argument("finite_diff_grad: eps must be positive");
  }
  Tensor probe = x;
  Tensor grad(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + eps;
    const double up = f(probe);
    probe[i] = saved - eps;
    const double down = f(probe);
    probe[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw std::runtime_error(
          "finite_diff_grad: non-finite evaluation at coordinate " +
          std::to_string(i));
    }
    grad[i] = (up - down) / (2.0 * eps);
  }
  return grad;
}

}  // namespace sodbench
