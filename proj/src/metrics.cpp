#include "sodbench/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "sodbench/tensor_ops.hpp"

namespace sodbench {

namespace {

// Matches the epsilon guards of the cited metric definitions.
constexpr double kEps = std::numeric_limits<double>::epsilon();

void require_pair(const SaliencyMap& pred, const GroundTruthMask& gt,
                  const char* what) {
  require_same_shape(pred.values(), gt.values(), what);
}

void handle_empty_gt(const EvalConfig& cfg, const char* what) {
  if (cfg.empty_gt_policy == EmptyGtPolicy::kSkipImage) {
    throw EmptyGroundTruthError(std::string(what) +
                                ": ground truth has no positive pixel");
  }
}

struct ThresholdCounts {
  std::array<std::size_t, 256> tp{};
  std::array<std::size_t, 256> fp{};
  std::size_t positives = 0;
};

// Suffix-summed histograms give the confusion counts of the strict > sweep
// in one pass over the image.
ThresholdCounts sweep_counts(const std::vector<std::uint8_t>& quantized,
                             const GroundTruthMask& gt) {
  std::array<std::size_t, 256> hist_pos{};
  std::array<std::size_t, 256> hist_neg{};
  for (std::size_t i = 0; i < quantized.size(); ++i) {
    if (gt.values()[i] == 1.0) {
      ++hist_pos[quantized[i]];
    } else {
      ++hist_neg[quantized[i]];
    }
  }
  ThresholdCounts counts;
  counts.positives = gt.positive_count();
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (int t = 255; t >= 0; --t) {
    // predicted positive at threshold t: quantized > t
    if (t < 255) {
      tp += hist_pos[t + 1];
      fp += hist_neg[t + 1];
    }
    counts.tp[t] = tp;
    counts.fp[t] = fp;
  }
  return counts;
}

double safe_ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

void validate_config(const EvalConfig& cfg) {
  if (!(cfg.beta_sq > 0.0)) {
    throw std::invalid_argument("eval config: beta_sq must be positive");
  }
  if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0)) {
    throw std::invalid_argument("eval config: alpha must lie in [0,1]");
  }
  if (cfg.threshold_count != 256) {
    throw std::invalid_argument(
        "eval config: threshold_count is fixed at 256 by the 8-bit sweep");
  }
  if (cfg.wf_gauss_size < 1 || cfg.wf_gauss_size % 2 == 0) {
    throw std::invalid_argument("eval config: wf_gauss_size must be odd");
  }
  if (!(cfg.wf_gauss_sigma > 0.0)) {
    throw std::invalid_argument("eval config: wf_gauss_sigma must be positive");
  }
  if (!(cfg.wf_beta_sq > 0.0)) {
    throw std::invalid_argument("eval config: wf_beta_sq must be positive");
  }
}

double mae(const SaliencyMap& pred, const GroundTruthMask& gt) {
  require_pair(pred, gt, "mae");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.pixel_count(); ++i) {
    sum += std::abs(pred.values()[i] - gt.values()[i]);
  }
  return sum / static_cast<double>(pred.pixel_count());
}

PRCurve pr_curve(const SaliencyMap& pred, const GroundTruthMask& gt,
                 const EvalConfig& cfg) {
  validate_config(cfg);
  require_pair(pred, gt, "pr_curve");
  if (gt.empty()) handle_empty_gt(cfg, "pr_curve");
  const ThresholdCounts counts = sweep_counts(pred.quantized(), gt);
  PRCurve curve;
  for (int t = 0; t < 256; ++t) {
    curve.precision[t] = safe_ratio(counts.tp[t], counts.tp[t] + counts.fp[t]);
    curve.recall[t] = safe_ratio(counts.tp[t], counts.positives);
  }
  return curve;
}

double f_beta(double precision, double recall, double beta_sq) {
  const double den = beta_sq * precision + recall;
  if (den == 0.0) return 0.0;
  return (1.0 + beta_sq) * precision * recall / den;
}

double f_max(const PRCurve& curve, const EvalConfig& cfg) {
  validate_config(cfg);
  double best = 0.0;
  for (int t = 0; t < 256; ++t) {
    best = std::max(best,
                    f_beta(curve.precision[t], curve.recall[t], cfg.beta_sq));
  }
  return best;
}

double adaptive_threshold(const SaliencyMap& pred) {
  const std::vector<std::uint8_t> q = pred.quantized();
  std::size_t sum = 0;
  for (std::uint8_t v : q) sum += v;
  const double mean = static_cast<double>(sum) / static_cast<double>(q.size());
  return std::min(2.0 * mean, 255.0);
}

double f_mean(const SaliencyMap& pred, const GroundTruthMask& gt,
              const EvalConfig& cfg) {
  validate_config(cfg);
  require_pair(pred, gt, "f_mean");
  if (gt.empty()) handle_empty_gt(cfg, "f_mean");
  const double threshold = adaptive_threshold(pred);
  const std::vector<std::uint8_t> q = pred.quantized();
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (static_cast<double>(q[i]) >= threshold) {
      if (gt.values()[i] == 1.0) {
        ++tp;
      } else {
        ++fp;
      }
    }
  }
  const double precision = safe_ratio(tp, tp + fp);
  const double recall = safe_ratio(tp, gt.positive_count());
  return f_beta(precision, recall, cfg.beta_sq);
}

// ---------------------------------------------------------------------------
// Weighted F-measure
// ---------------------------------------------------------------------------

namespace {

struct NearestSite {
  std::size_t index = 0;  // flat index of the nearest foreground pixel
  double distance = 0.0;
};

// Exact nearest foreground pixel per background pixel, minimizing squared
// Euclidean distance with ties broken by smallest (row, col). Decomposed per
// column: a two-pass scan finds each column's nearest foreground row, then an
// outward column sweep with an early cutoff resolves each pixel.
std::vector<NearestSite> nearest_foreground(const GroundTruthMask& gt) {
  const long h = static_cast<long>(gt.height());
  const long w = static_cast<long>(gt.width());
  const Tensor& mask = gt.values();

  // nearest_row[x*h + r]: closest foreground row to r within column x
  // (smaller row on ties), or -1 when the column has none.
  std::vector<long> nearest_row(static_cast<std::size_t>(h * w), -1);
  for (long x = 0; x < w; ++x) {
    long last = -1;
    for (long r = 0; r < h; ++r) {
      if (mask[static_cast<std::size_t>(r * w + x)] == 1.0) last = r;
      nearest_row[static_cast<std::size_t>(x * h + r)] = last;
    }
    long next = -1;
    for (long r = h - 1; r >= 0; --r) {
      if (mask[static_cast<std::size_t>(r * w + x)] == 1.0) next = r;
      long& best = nearest_row[static_cast<std::size_t>(x * h + r)];
      if (next >= 0) {
        // strict improvement only: the downward pass already stored the
        // smaller row of any equidistant pair
        if (best < 0 || next - r < r - best) best = next;
      }
    }
  }

  std::vector<NearestSite> sites(static_cast<std::size_t>(h * w));
  for (long r = 0; r < h; ++r) {
    for (long u = 0; u < w; ++u) {
      const std::size_t flat = static_cast<std::size_t>(r * w + u);
      if (mask[flat] == 1.0) {
        sites[flat] = NearestSite{flat, 0.0};
        continue;
      }
      long best_d2 = std::numeric_limits<long>::max();
      long best_r = -1;
      long best_c = -1;
      auto consider = [&](long x) {
        const long row = nearest_row[static_cast<std::size_t>(x * h + r)];
        if (row < 0) return;
        const long dy = r - row;
        const long dx = u - x;
        const long d2 = dx * dx + dy * dy;
        if (d2 < best_d2 ||
            (d2 == best_d2 && (row < best_r || (row == best_r && x < best_c)))) {
          best_d2 = d2;
          best_r = row;
          best_c = x;
        }
      };
      for (long s = 0; s < w; ++s) {
        if (best_r >= 0 && s * s > best_d2) break;
        if (u - s >= 0) consider(u - s);
        if (s > 0 && u + s < w) consider(u + s);
      }
      sites[flat] = NearestSite{static_cast<std::size_t>(best_r * w + best_c),
                                std::sqrt(static_cast<double>(best_d2))};
    }
  }
  return sites;
}

// Normalized Gaussian weights of an odd k x k window.
std::vector<double> gaussian_kernel(int k, double sigma) {
  std::vector<double> kernel(static_cast<std::size_t>(k) * k);
  const int half = k / 2;
  double total = 0.0;
  for (int dy = -half; dy <= half; ++dy) {
    for (int dx = -half; dx <= half; ++dx) {
      const double v =
          std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      kernel[static_cast<std::size_t>(dy + half) * k + (dx + half)] = v;
      total += v;
    }
  }
  for (double& v : kernel) v /= total;
  return kernel;
}

// Zero-padded correlation of a single-channel image with a k x k kernel.
std::vector<double> filter2(const std::vector<double>& image, long h, long w,
                            const std::vector<double>& kernel, int k) {
  const int half = k / 2;
  std::vector<double> out(image.size(), 0.0);
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int dy = -half; dy <= half; ++dy) {
        const long sy = y + dy;
        if (sy < 0 || sy >= h) continue;
        for (int dx = -half; dx <= half; ++dx) {
          const long sx = x + dx;
          if (sx < 0 || sx >= w) continue;
          acc += image[static_cast<std::size_t>(sy * w + sx)] *
                 kernel[static_cast<std::size_t>(dy + half) * k + (dx + half)];
        }
      }
      out[static_cast<std::size_t>(y * w + x)] = acc;
    }
  }
  return out;
}

}  // namespace

double f_weighted(const SaliencyMap& pred, const GroundTruthMask& gt,
                  const EvalConfig& cfg) {
  validate_config(cfg);
  require_pair(pred, gt, "f_weighted");
  if (gt.empty()) {
    handle_empty_gt(cfg, "f_weighted");
    return 0.0;
  }
  const long h = static_cast<long>(gt.height());
  const long w = static_cast<long>(gt.width());
  const std::size_t n = gt.pixel_count();

  std::vector<double> abs_err(n);
  for (std::size_t i = 0; i < n; ++i) {
    abs_err[i] = std::abs(pred.values()[i] - gt.values()[i]);
  }

  // Background errors take the error of their nearest foreground pixel, so
  // smoothing does not leak the raw background disagreement into the object.
  const std::vector<NearestSite> sites = nearest_foreground(gt);
  std::vector<double> carried = abs_err;
  for (std::size_t i = 0; i < n; ++i) {
    if (gt.values()[i] != 1.0) carried[i] = abs_err[sites[i].index];
  }

  const std::vector<double> smoothed =
      filter2(carried, h, w,
              gaussian_kernel(cfg.wf_gauss_size, cfg.wf_gauss_sigma),
              cfg.wf_gauss_size);

  const double decay = std::log(0.5) / 5.0;
  double fg_weighted_err = 0.0;
  double bg_weighted_err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (gt.values()[i] == 1.0) {
      const double e = std::min(abs_err[i], smoothed[i]);
      fg_weighted_err += e;  // pixel importance is 1 on the foreground
    } else {
      const double importance = 2.0 - std::exp(decay * sites[i].distance);
      bg_weighted_err += abs_err[i] * importance;
    }
  }

  const double positives = static_cast<double>(gt.positive_count());
  const double recall = 1.0 - fg_weighted_err / positives;
  const double tp_weighted = positives - fg_weighted_err;
  const double precision = tp_weighted / (kEps + tp_weighted + bg_weighted_err);
  return (1.0 + cfg.wf_beta_sq) * recall * precision /
         (kEps + cfg.wf_beta_sq * precision + recall);
}

// ---------------------------------------------------------------------------
// Structure measure
// ---------------------------------------------------------------------------

namespace {

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) /
         static_cast<double>(v.size());
}

// 2x/(x^2 + 1 + sigma + eps) over one region's prediction values, with the
// sample standard deviation as dispersion.
double object_score(const std::vector<double>& region) {
  if (region.empty()) return 0.0;
  const double x = mean_of(region);
  double var = 0.0;
  if (region.size() > 1) {
    for (double v : region) var += (v - x) * (v - x);
    var /= static_cast<double>(region.size() - 1);
  }
  return 2.0 * x / (x * x + 1.0 + std::sqrt(var) + kEps);
}

struct Quadrant {
  long row0, row1, col0, col1;  // half-open pixel ranges
  std::size_t area() const {
    return static_cast<std::size_t>((row1 - row0) * (col1 - col0));
  }
};

// Region-level structural similarity of one quadrant.
double region_ssim(const SaliencyMap& pred, const GroundTruthMask& gt,
                   const Quadrant& q) {
  const std::size_t n = q.area();
  double sum_p = 0.0;
  double sum_g = 0.0;
  for (long r = q.row0; r < q.row1; ++r) {
    for (long c = q.col0; c < q.col1; ++c) {
      sum_p += pred.values().at(0, r, c);
      sum_g += gt.values().at(0, r, c);
    }
  }
  const double x = sum_p / static_cast<double>(n);
  const double y = sum_g / static_cast<double>(n);
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (long r = q.row0; r < q.row1; ++r) {
    for (long c = q.col0; c < q.col1; ++c) {
      const double dp = pred.values().at(0, r, c) - x;
      const double dg = gt.values().at(0, r, c) - y;
      sxx += dp * dp;
      syy += dg * dg;
      sxy += dp * dg;
    }
  }
  const double den = static_cast<double>(n) - 1.0 + kEps;
  sxx /= den;
  syy /= den;
  sxy /= den;
  const double alpha = 4.0 * x * y * sxy;
  const double beta = (x * x + y * y) * (sxx + syy);
  if (alpha != 0.0) return alpha / (beta + kEps);
  return beta == 0.0 ? 1.0 : 0.0;
}

}  // namespace

SMeasureParts s_measure_parts(const SaliencyMap& pred,
                              const GroundTruthMask& gt) {
  require_pair(pred, gt, "s_measure");
  if (gt.empty() || gt.full()) {
    throw std::invalid_argument(
        "s_measure_parts: degenerate mask has no object/region split");
  }
  const std::size_t n = gt.pixel_count();

  // object-aware term over foreground prediction and background complement
  std::vector<double> fg_values;
  std::vector<double> bg_values;
  fg_values.reserve(gt.positive_count());
  bg_values.reserve(n - gt.positive_count());
  for (std::size_t i = 0; i < n; ++i) {
    if (gt.values()[i] == 1.0) {
      fg_values.push_back(pred.values()[i]);
    } else {
      bg_values.push_back(1.0 - pred.values()[i]);
    }
  }
  const double fg_ratio =
      static_cast<double>(gt.positive_count()) / static_cast<double>(n);
  const double object =
      fg_ratio * object_score(fg_values) +
      (1.0 - fg_ratio) * object_score(bg_values);

  // region-aware term around the mask centroid (1-based rounding, matching
  // the cited construction)
  const long h = static_cast<long>(gt.height());
  const long w = static_cast<long>(gt.width());
  double sum_r1 = 0.0;
  double sum_c1 = 0.0;
  for (long r = 0; r < h; ++r) {
    for (long c = 0; c < w; ++c) {
      if (gt.values().at(0, r, c) == 1.0) {
        sum_r1 += static_cast<double>(r + 1);
        sum_c1 += static_cast<double>(c + 1);
      }
    }
  }
  const double total = static_cast<double>(gt.positive_count());
  const long cut_y = static_cast<long>(std::floor(sum_r1 / total + 0.5));
  const long cut_x = static_cast<long>(std::floor(sum_c1 / total + 0.5));

  const Quadrant quadrants[4] = {
      {0, cut_y, 0, cut_x},
      {0, cut_y, cut_x, w},
      {cut_y, h, 0, cut_x},
      {cut_y, h, cut_x, w},
  };
  double region = 0.0;
  for (const Quadrant& q : quadrants) {
    if (q.area() == 0) continue;  // zero weight anyway
    const double weight =
        static_cast<double>(q.area()) / static_cast<double>(n);
    region += weight * region_ssim(pred, gt, q);
  }
  return SMeasureParts{object, region};
}

double s_measure(const SaliencyMap& pred, const GroundTruthMask& gt,
                 const EvalConfig& cfg) {
  validate_config(cfg);
  require_pair(pred, gt, "s_measure");
  if (gt.empty()) return 1.0 - mean_of(pred.values().data());
  if (gt.full()) return mean_of(pred.values().data());
  const SMeasureParts parts = s_measure_parts(pred, gt);
  const double q =
      cfg.alpha * parts.object_score + (1.0 - cfg.alpha) * parts.region_score;
  return std::max(q, 0.0);
}

// ---------------------------------------------------------------------------
// Enhanced alignment measure
// ---------------------------------------------------------------------------

double e_measure_binary(const std::vector<std::uint8_t>& binary_pred,
                        const GroundTruthMask& gt) {
  if (binary_pred.size() != gt.pixel_count()) {
    throw std::invalid_argument("e_measure: prediction/mask size mismatch");
  }
  const std::size_t n = gt.pixel_count();
  std::size_t pred_pos = 0;
  for (std::uint8_t b : binary_pred) pred_pos += b;

  if (gt.empty()) {
    return 1.0 -
           static_cast<double>(pred_pos) / static_cast<double>(n);
  }
  if (gt.full()) {
    return static_cast<double>(pred_pos) / static_cast<double>(n);
  }
  const double mu_p = static_cast<double>(pred_pos) / static_cast<double>(n);
  const double mu_g =
      static_cast<double>(gt.positive_count()) / static_cast<double>(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double phi_p = static_cast<double>(binary_pred[i]) - mu_p;
    const double phi_g = gt.values()[i] - mu_g;
    // phi_g is never 0 here, so the denominator is positive
    const double xi = 2.0 * phi_g * phi_p / (phi_g * phi_g + phi_p * phi_p);
    const double aligned = 1.0 + xi;
    sum += aligned * aligned / 4.0;
  }
  return sum / static_cast<double>(n);
}

double e_measure(const SaliencyMap& pred, const GroundTruthMask& gt,
                 const EvalConfig& cfg) {
  validate_config(cfg);
  require_pair(pred, gt, "e_measure");
  const std::vector<std::uint8_t> q = pred.quantized();
  std::vector<std::uint8_t> binary(q.size());

  if (cfg.e_measure_binarization == EMeasureBinarization::kAdaptiveThreshold) {
    const double threshold = adaptive_threshold(pred);
    for (std::size_t i = 0; i < q.size(); ++i) {
      binary[i] = static_cast<double>(q[i]) >= threshold ? 1 : 0;
    }
    return e_measure_binary(binary, gt);
  }

  // max over the strict > sweep
  double best = 0.0;
  for (int t = 0; t < 256; ++t) {
    for (std::size_t i = 0; i < q.size(); ++i) binary[i] = q[i] > t ? 1 : 0;
    best = std::max(best, e_measure_binary(binary, gt));
  }
  return best;
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

PerImageMetrics evaluate_pair(const SaliencyMap& pred,
                              const GroundTruthMask& gt, const EvalConfig& cfg,
                              const std::string& stem) {
  validate_config(cfg);
  const SaliencyMap* effective = &pred;
  SaliencyMap resized{Tensor({1, 1, 1})};
  if (!pred.values().same_shape(gt.values())) {
    // ground truth is the reference frame
    resized = SaliencyMap(
        bilinear_resize(pred.values(), gt.height(), gt.width()));
    effective = &resized;
  }
  if (gt.empty() && cfg.empty_gt_policy == EmptyGtPolicy::kSkipImage) {
    throw EmptyGroundTruthError("evaluate_pair: empty ground truth for '" +
                                stem + "'");
  }
  PerImageMetrics m;
  m.stem = stem;
  m.mae = mae(*effective, gt);
  m.pr = pr_curve(*effective, gt, cfg);
  m.f_max = f_max(m.pr, cfg);
  m.f_mean = f_mean(*effective, gt, cfg);
  m.f_weighted = f_weighted(*effective, gt, cfg);
  m.s_measure = s_measure(*effective, gt, cfg);
  m.e_measure = e_measure(*effective, gt, cfg);
  return m;
}

MetricReport evaluate_dataset(const std::vector<EvalPair>& pairs,
                              const EvalConfig& cfg, int workers) {
  validate_config(cfg);
  if (pairs.empty()) {
    throw std::invalid_argument("evaluate_dataset: no prediction/ground-truth "
                                "pairs");
  }
  if (workers < 1) workers = 1;

  // stem-sorted evaluation order makes the reduction scheduling-independent
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return pairs[a].stem < pairs[b].stem;
                   });

  struct Slot {
    bool skipped = false;
    PerImageMetrics metrics;
  };
  std::vector<Slot> slots(pairs.size());
  std::atomic<std::size_t> cursor{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto run = [&]() {
    for (;;) {
      const std::size_t k = cursor.fetch_add(1);
      if (k >= order.size()) break;
      const EvalPair& pair = pairs[order[k]];
      try {
        slots[k].metrics = evaluate_pair(pair.pred, pair.gt, cfg, pair.stem);
      } catch (const EmptyGroundTruthError&) {
        slots[k].skipped = true;
        slots[k].metrics.stem = pair.stem;
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  const int thread_count =
      std::min<std::size_t>(static_cast<std::size_t>(workers), pairs.size());
  if (thread_count <= 1) {
    run();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(thread_count);
    for (int i = 0; i < thread_count; ++i) threads.emplace_back(run);
    for (std::thread& t : threads) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  MetricReport report;
  for (Slot& slot : slots) {
    if (slot.skipped) {
      report.skipped.push_back(slot.metrics.stem);
    } else {
      report.images.push_back(std::move(slot.metrics));
    }
  }
  if (report.images.empty()) {
    throw std::runtime_error(
        "evaluate_dataset: every pair was skipped (empty ground truths)");
  }

  const double count = static_cast<double>(report.images.size());
  for (const PerImageMetrics& m : report.images) {
    report.mae += m.mae;
    report.f_max_per_image += m.f_max;
    report.f_mean += m.f_mean;
    report.f_weighted += m.f_weighted;
    report.s_measure += m.s_measure;
    report.e_measure += m.e_measure;
    for (int t = 0; t < 256; ++t) {
      report.pr.precision[t] += m.pr.precision[t];
      report.pr.recall[t] += m.pr.recall[t];
    }
  }
  report.mae /= count;
  report.f_max_per_image /= count;
  report.f_mean /= count;
  report.f_weighted /= count;
  report.s_measure /= count;
  report.e_measure /= count;
  for (int t = 0; t < 256; ++t) {
    report.pr.precision[t] /= count;
    report.pr.recall[t] /= count;
  }
  report.f_max = f_max(report.pr, cfg);
  return report;
}

}  // namespace sodbench
