#include "sodbench/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sodbench::reference {

namespace {
constexpr double kEps = std::numeric_limits<double>::epsilon();
}

Tensor conv2d(const Tensor& input, const ConvSpec& spec) {
  const long c_in = static_cast<long>(input.extent(0));
  const long h = static_cast<long>(input.extent(1));
  const long w = static_cast<long>(input.extent(2));
  const long kh = static_cast<long>(spec.kernel_h());
  const long kw = static_cast<long>(spec.kernel_w());
  const long pad = spec.padding;

  // explicit zero-padded copy
  const long ph = h + 2 * pad;
  const long pw = w + 2 * pad;
  Tensor padded({static_cast<std::size_t>(c_in), static_cast<std::size_t>(ph),
                 static_cast<std::size_t>(pw)});
  for (long c = 0; c < c_in; ++c) {
    for (long y = 0; y < h; ++y) {
      for (long x = 0; x < w; ++x) {
        padded.at(c, y + pad, x + pad) = input.at(c, y, x);
      }
    }
  }

  const long out_h = (h + 2 * pad - spec.dilation * (kh - 1) - 1) / spec.stride + 1;
  const long out_w = (w + 2 * pad - spec.dilation * (kw - 1) - 1) / spec.stride + 1;
  Tensor out({spec.out_channels(), static_cast<std::size_t>(out_h),
              static_cast<std::size_t>(out_w)});
  for (std::size_t oc = 0; oc < spec.out_channels(); ++oc) {
    for (long oy = 0; oy < out_h; ++oy) {
      for (long ox = 0; ox < out_w; ++ox) {
        double acc = 0.0;
        for (long ic = 0; ic < c_in; ++ic) {
          for (long ky = 0; ky < kh; ++ky) {
            for (long kx = 0; kx < kw; ++kx) {
              const long yy = oy * spec.stride + ky * spec.dilation;
              const long xx = ox * spec.stride + kx * spec.dilation;
              acc += padded.at(ic, yy, xx) * spec.kernel.at(oc, ic, ky, kx);
            }
          }
        }
        out.at(oc, oy, ox) = acc + spec.bias[oc];
      }
    }
  }
  return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  const std::size_t m = a.extent(0);
  const std::size_t k = a.extent(1);
  const std::size_t n = b.extent(1);
  Tensor out({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += a.at(i, p) * b.at(p, j);
      out.at(i, j) = acc;
    }
  }
  return out;
}

PRCurve pr_curve(const SaliencyMap& pred, const GroundTruthMask& gt) {
  const std::vector<std::uint8_t> q = pred.quantized();
  PRCurve curve;
  for (int t = 0; t < 256; ++t) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      const bool predicted = q[i] > t;
      const bool actual = gt.values()[i] == 1.0;
      if (predicted && actual) ++tp;
      if (predicted && !actual) ++fp;
      if (!predicted && actual) ++fn;
    }
    curve.precision[t] =
        tp + fp == 0 ? 0.0
                     : static_cast<double>(tp) / static_cast<double>(tp + fp);
    curve.recall[t] =
        tp + fn == 0 ? 0.0
                     : static_cast<double>(tp) / static_cast<double>(tp + fn);
  }
  return curve;
}

double mae(const SaliencyMap& pred, const GroundTruthMask& gt) {
  double sum = 0.0;
  for (std::size_t y = 0; y < pred.height(); ++y) {
    for (std::size_t x = 0; x < pred.width(); ++x) {
      sum += std::abs(pred.values().at(0, y, x) - gt.values().at(0, y, x));
    }
  }
  return sum / static_cast<double>(pred.pixel_count());
}

double f_mean(const SaliencyMap& pred, const GroundTruthMask& gt,
              const EvalConfig& cfg) {
  const std::vector<std::uint8_t> q = pred.quantized();
  double mean = 0.0;
  for (std::uint8_t v : q) mean += v;
  mean /= static_cast<double>(q.size());
  const double threshold = std::min(2.0 * mean, 255.0);

  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const bool predicted = static_cast<double>(q[i]) >= threshold;
    const bool actual = gt.values()[i] == 1.0;
    if (predicted && actual) ++tp;
    if (predicted && !actual) ++fp;
    if (!predicted && actual) ++fn;
  }
  const double p =
      tp + fp == 0 ? 0.0
                   : static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double r =
      tp + fn == 0 ? 0.0
                   : static_cast<double>(tp) / static_cast<double>(tp + fn);
  const double den = cfg.beta_sq * p + r;
  return den == 0.0 ? 0.0 : (1.0 + cfg.beta_sq) * p * r / den;
}

double f_weighted(const SaliencyMap& pred, const GroundTruthMask& gt,
                  const EvalConfig& cfg) {
  const long h = static_cast<long>(gt.height());
  const long w = static_cast<long>(gt.width());
  const auto fg = [&](long y, long x) {
    return gt.values().at(0, y, x) == 1.0;
  };

  std::vector<double> err(gt.pixel_count());
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      err[y * w + x] =
          std::abs(pred.values().at(0, y, x) - gt.values().at(0, y, x));
    }
  }

  // all-pairs nearest foreground pixel, smallest (row,col) on distance ties
  std::vector<double> carried = err;
  std::vector<double> dist(gt.pixel_count(), 0.0);
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      if (fg(y, x)) continue;
      long best_d2 = std::numeric_limits<long>::max();
      long best_y = -1, best_x = -1;
      for (long fy = 0; fy < h; ++fy) {
        for (long fx = 0; fx < w; ++fx) {
          if (!fg(fy, fx)) continue;
          const long d2 = (fy - y) * (fy - y) + (fx - x) * (fx - x);
          if (d2 < best_d2) {
            best_d2 = d2;
            best_y = fy;
            best_x = fx;
          }
        }
      }
      carried[y * w + x] = err[best_y * w + best_x];
      dist[y * w + x] = std::sqrt(static_cast<double>(best_d2));
    }
  }

  // normalized Gaussian window, zero-padded correlation
  const int k = cfg.wf_gauss_size;
  const int half = k / 2;
  std::vector<double> kernel(static_cast<std::size_t>(k) * k);
  double ksum = 0.0;
  for (int dy = -half; dy <= half; ++dy) {
    for (int dx = -half; dx <= half; ++dx) {
      const double v = std::exp(-(dx * dx + dy * dy) /
                                (2.0 * cfg.wf_gauss_sigma * cfg.wf_gauss_sigma));
      kernel[(dy + half) * k + (dx + half)] = v;
      ksum += v;
    }
  }
  for (double& v : kernel) v /= ksum;

  std::vector<double> smoothed(gt.pixel_count(), 0.0);
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int dy = -half; dy <= half; ++dy) {
        for (int dx = -half; dx <= half; ++dx) {
          const long sy = y + dy;
          const long sx = x + dx;
          if (sy < 0 || sy >= h || sx < 0 || sx >= w) continue;
          acc += carried[sy * w + sx] * kernel[(dy + half) * k + (dx + half)];
        }
      }
      smoothed[y * w + x] = acc;
    }
  }

  double fg_err = 0.0, bg_err = 0.0;
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      const std::size_t i = y * w + x;
      if (fg(y, x)) {
        fg_err += std::min(err[i], smoothed[i]);
      } else {
        const double importance =
            2.0 - std::exp(std::log(0.5) / 5.0 * dist[i]);
        bg_err += err[i] * importance;
      }
    }
  }
  const double npos = static_cast<double>(gt.positive_count());
  const double recall = 1.0 - fg_err / npos;
  const double tpw = npos - fg_err;
  const double precision = tpw / (kEps + tpw + bg_err);
  return (1.0 + cfg.wf_beta_sq) * recall * precision /
         (kEps + cfg.wf_beta_sq * precision + recall);
}

namespace {

// literal transcription helpers over explicit value buffers

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() <= 1) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

double object_term(const std::vector<double>& region) {
  if (region.empty()) return 0.0;
  const double x = mean_of(region);
  return 2.0 * x / (x * x + 1.0 + sample_std(region) + kEps);
}

double ssim_term(const std::vector<double>& p, const std::vector<double>& g) {
  const double n = static_cast<double>(p.size());
  const double x = mean_of(p);
  const double y = mean_of(g);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    sxx += (p[i] - x) * (p[i] - x);
    syy += (g[i] - y) * (g[i] - y);
    sxy += (p[i] - x) * (g[i] - y);
  }
  sxx /= n - 1.0 + kEps;
  syy /= n - 1.0 + kEps;
  sxy /= n - 1.0 + kEps;
  const double alpha = 4.0 * x * y * sxy;
  const double beta = (x * x + y * y) * (sxx + syy);
  if (alpha != 0.0) return alpha / (beta + kEps);
  return beta == 0.0 ? 1.0 : 0.0;
}

}  // namespace

double s_measure(const SaliencyMap& pred, const GroundTruthMask& gt,
                 const EvalConfig& cfg) {
  const long h = static_cast<long>(gt.height());
  const long w = static_cast<long>(gt.width());
  if (gt.empty()) return 1.0 - mean_of(pred.values().data());
  if (gt.full()) return mean_of(pred.values().data());

  std::vector<double> fg, bg;
  for (std::size_t i = 0; i < gt.pixel_count(); ++i) {
    if (gt.values()[i] == 1.0) {
      fg.push_back(pred.values()[i]);
    } else {
      bg.push_back(1.0 - pred.values()[i]);
    }
  }
  const double u = static_cast<double>(gt.positive_count()) /
                   static_cast<double>(gt.pixel_count());
  const double s_object = u * object_term(fg) + (1.0 - u) * object_term(bg);

  double sum_r = 0.0, sum_c = 0.0;
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      if (gt.values().at(0, y, x) == 1.0) {
        sum_r += static_cast<double>(y + 1);
        sum_c += static_cast<double>(x + 1);
      }
    }
  }
  const double total = static_cast<double>(gt.positive_count());
  const long cy = static_cast<long>(std::floor(sum_r / total + 0.5));
  const long cx = static_cast<long>(std::floor(sum_c / total + 0.5));

  const long bounds[4][4] = {
      {0, cy, 0, cx}, {0, cy, cx, w}, {cy, h, 0, cx}, {cy, h, cx, w}};
  double s_region = 0.0;
  for (const auto& b : bounds) {
    std::vector<double> p, g;
    for (long y = b[0]; y < b[1]; ++y) {
      for (long x = b[2]; x < b[3]; ++x) {
        p.push_back(pred.values().at(0, y, x));
        g.push_back(gt.values().at(0, y, x));
      }
    }
    if (p.empty()) continue;
    const double weight =
        static_cast<double>(p.size()) / static_cast<double>(gt.pixel_count());
    s_region += weight * ssim_term(p, g);
  }
  const double q = cfg.alpha * s_object + (1.0 - cfg.alpha) * s_region;
  return std::max(q, 0.0);
}

double e_measure(const SaliencyMap& pred, const GroundTruthMask& gt,
                 const EvalConfig& cfg) {
  const std::vector<std::uint8_t> q = pred.quantized();
  double mean = 0.0;
  for (std::uint8_t v : q) mean += v;
  mean /= static_cast<double>(q.size());
  const double threshold = std::min(2.0 * mean, 255.0);

  auto score = [&](const std::vector<double>& fm) {
    const std::size_t n = fm.size();
    double fm_sum = 0.0;
    for (double v : fm) fm_sum += v;
    if (gt.empty()) return 1.0 - fm_sum / static_cast<double>(n);
    if (gt.full()) return fm_sum / static_cast<double>(n);
    const double mu_f = fm_sum / static_cast<double>(n);
    const double mu_g = static_cast<double>(gt.positive_count()) /
                        static_cast<double>(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double pf = fm[i] - mu_f;
      const double pg = gt.values()[i] - mu_g;
      const double xi = 2.0 * pg * pf / (pg * pg + pf * pf);
      sum += (1.0 + xi) * (1.0 + xi) / 4.0;
    }
    return sum / static_cast<double>(n);
  };

  std::vector<double> fm(q.size());
  if (cfg.e_measure_binarization == EMeasureBinarization::kAdaptiveThreshold) {
    for (std::size_t i = 0; i < q.size(); ++i) {
      fm[i] = static_cast<double>(q[i]) >= threshold ? 1.0 : 0.0;
    }
    return score(fm);
  }
  double best = 0.0;
  for (int t = 0; t < 256; ++t) {
    for (std::size_t i = 0; i < q.size(); ++i) fm[i] = q[i] > t ? 1.0 : 0.0;
    best = std::max(best, score(fm));
  }
  return best;
}

Tensor pafe_attention(const Tensor& f_in, const ConvSpec& conv) {
  const Tensor projected = conv2d(f_in, conv);
  const std::size_t c = projected.extent(0);
  const std::size_t n = projected.extent(1) * projected.extent(2);
  Tensor gram({n, n});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t ch = 0; ch < c; ++ch) {
        dot += projected[ch * n + i] * projected[ch * n + j];
      }
      gram.at(i, j) = dot;
    }
  }
  Tensor out({n, n});
  for (std::size_t i = 0; i < n; ++i) {
    double m = gram.at(i, 0);
    for (std::size_t j = 1; j < n; ++j) m = std::max(m, gram.at(i, j));
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      out.at(i, j) = std::exp(gram.at(i, j) - m);
      sum += out.at(i, j);
    }
    for (std::size_t j = 0; j < n; ++j) out.at(i, j) /= sum;
  }
  return out;
}

Tensor conv2d_weighted_sum_grad(const Tensor& input, const ConvSpec& spec,
                                const Tensor& weights) {
  const long h = static_cast<long>(input.extent(1));
  const long w = static_cast<long>(input.extent(2));
  const long kh = static_cast<long>(spec.kernel_h());
  const long kw = static_cast<long>(spec.kernel_w());
  Tensor grad(input.shape());
  // accumulate each output's weight back onto the inputs it reads
  for (std::size_t oc = 0; oc < spec.out_channels(); ++oc) {
    for (std::size_t oy = 0; oy < weights.extent(1); ++oy) {
      for (std::size_t ox = 0; ox < weights.extent(2); ++ox) {
        const double wv = weights.at(oc, oy, ox);
        for (std::size_t ic = 0; ic < spec.in_channels(); ++ic) {
          for (long ky = 0; ky < kh; ++ky) {
            for (long kx = 0; kx < kw; ++kx) {
              const long iy = static_cast<long>(oy) * spec.stride -
                              spec.padding + ky * spec.dilation;
              const long ix = static_cast<long>(ox) * spec.stride -
                              spec.padding + kx * spec.dilation;
              if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;
              grad.at(ic, iy, ix) += wv * spec.kernel.at(oc, ic, ky, kx);
            }
          }
        }
      }
    }
  }
  return grad;
}

Tensor sigmoid_sum_grad(const Tensor& x) {
  Tensor grad(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double s = 1.0 / (1.0 + std::exp(-x[i]));
    grad[i] = s * (1.0 - s);
  }
  return grad;
}

Tensor softmax_weighted_sum_grad(const Tensor& x, const Tensor& weights) {
  const Tensor s = softmax_rows(x);
  const std::size_t rows = x.extent(0);
  const std::size_t cols = x.extent(1);
  Tensor grad(x.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    double dot = 0.0;
    for (std::size_t c = 0; c < cols; ++c) dot += s.at(r, c) * weights.at(r, c);
    for (std::size_t c = 0; c < cols; ++c) {
      grad.at(r, c) = s.at(r, c) * (weights.at(r, c) - dot);
    }
  }
  return grad;
}

}  // namespace sodbench::reference
