#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "sodbench/maps.hpp"

namespace sodbench {

// What to do with an image whose ground truth has no positive pixel.
enum class EmptyGtPolicy { kSkipImage, kScoreZero };

// How the prediction is binarized before the alignment measure. The paper
// reports a single value per dataset without fixing the rule, so it stays
// selectable; adaptive is the default.
enum class EMeasureBinarization { kAdaptiveThreshold, kMaxOverThresholds };

struct EvalConfig {
  double beta_sq = 0.3;        // F-measure precision emphasis
  double alpha = 0.5;          // object/region mix of the structure measure
  int threshold_count = 256;   // 8-bit sweep; fixed by the curve layout
  int wf_gauss_size = 7;       // weighted-F smoothing kernel extent
  double wf_gauss_sigma = 5.0;
  double wf_beta_sq = 1.0;     // beta^2 inside the weighted F combination
  EmptyGtPolicy empty_gt_policy = EmptyGtPolicy::kSkipImage;
  EMeasureBinarization e_measure_binarization =
      EMeasureBinarization::kAdaptiveThreshold;
};

void validate_config(const EvalConfig& cfg);

// Raised by per-image metrics when the ground truth is empty and the policy
// says to skip the image.
class EmptyGroundTruthError : public std::runtime_error {
 public:
  explicit EmptyGroundTruthError(const std::string& what)
      : std::runtime_error(what) {}
};

// Precision/recall over the 8-bit threshold sweep. At threshold t the
// prediction binarizes to quantized > t (strict), so t = 0 keeps every
// nonzero pixel and t = 255 selects none. Ratios with an empty denominator
// are defined as 0.
struct PRCurve {
  std::array<double, 256> precision{};
  std::array<double, 256> recall{};
};

struct PerImageMetrics {
  std::string stem;
  double mae = 0.0;
  double f_max = 0.0;       // best F over this image's curve
  double f_mean = 0.0;      // F at the adaptive threshold
  double f_weighted = 0.0;
  double s_measure = 0.0;
  double e_measure = 0.0;
  PRCurve pr;
};

struct MetricReport {
  std::vector<PerImageMetrics> images;
  std::vector<std::string> skipped;  // stems dropped by the empty-gt policy
  double mae = 0.0;                  // arithmetic means over images
  double f_max = 0.0;                // from the dataset-averaged curve
  double f_max_per_image = 0.0;      // mean of per-image maxima
  double f_mean = 0.0;
  double f_weighted = 0.0;
  double s_measure = 0.0;
  double e_measure = 0.0;
  PRCurve pr;                        // per-threshold means across images
};

double mae(const SaliencyMap& pred, const GroundTruthMask& gt);

PRCurve pr_curve(const SaliencyMap& pred, const GroundTruthMask& gt,
                 const EvalConfig& cfg = {});

// (1+beta^2)*p*r / (beta^2*p + r); 0 when the denominator vanishes.
double f_beta(double precision, double recall, double beta_sq);

double f_max(const PRCurve& curve, const EvalConfig& cfg = {});

// Twice the mean of the quantized prediction, clamped to 255. Pixels
// binarize as quantized >= threshold (so a perfect binary prediction stays
// perfect even when the clamp engages).
double adaptive_threshold(const SaliencyMap& pred);

double f_mean(const SaliencyMap& pred, const GroundTruthMask& gt,
              const EvalConfig& cfg = {});

// Dependency-weighted F: absolute errors, with background errors replaced by
// the error at the nearest foreground pixel (ties by smallest (row,col)),
// Gaussian-smoothed, min-combined on the foreground, and distance-decayed on
// the background; combined with wf_beta_sq.
double f_weighted(const SaliencyMap& pred, const GroundTruthMask& gt,
                  const EvalConfig& cfg = {});

struct SMeasureParts {
  double object_score = 0.0;
  double region_score = 0.0;
};

// Object- and region-aware structure scores before the alpha mix; only
// defined for non-degenerate ground truth.
SMeasureParts s_measure_parts(const SaliencyMap& pred,
                              const GroundTruthMask& gt);

// alpha*S_o + (1-alpha)*S_r, clamped at 0. Degenerate masks score from the
// mean prediction: 1-mean for all-background, mean for all-foreground.
double s_measure(const SaliencyMap& pred, const GroundTruthMask& gt,
                 const EvalConfig& cfg = {});

// Alignment between the binarized prediction and the mask: with phi the
// mean-centered map, xi = 2*phi_g*phi_p / (phi_g^2 + phi_p^2) and the score
// is mean((1+xi)^2 / 4). Degenerate masks score mean(1-binary) / mean(binary).
double e_measure(const SaliencyMap& pred, const GroundTruthMask& gt,
                 const EvalConfig& cfg = {});

// Alignment score for an explicitly binarized prediction.
double e_measure_binary(const std::vector<std::uint8_t>& binary_pred,
                        const GroundTruthMask& gt);

PerImageMetrics evaluate_pair(const SaliencyMap& pred,
                              const GroundTruthMask& gt,
                              const EvalConfig& cfg = {},
                              const std::string& stem = "");

struct EvalPair {
  std::string stem;
  SaliencyMap pred;
  GroundTruthMask gt;
};

// Evaluates every pair (in parallel when workers > 1) and aggregates in stem
// order, so reports do not depend on scheduling. Predictions are resized to
// the ground-truth dimensions first.
MetricReport evaluate_dataset(const std::vector<EvalPair>& pairs,
                              const EvalConfig& cfg = {}, int workers = 1);

}  // namespace sodbench
