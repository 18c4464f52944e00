#pragma once

#include <cstdint>
#include <vector>

#include "sodbench/maps.hpp"
#include "sodbench/metrics.hpp"
#include "sodbench/tensor.hpp"
#include "sodbench/tensor_ops.hpp"

// Slow, direct implementations kept deliberately separate from the optimized
// code paths. The selftest and gradcheck commands compare against these at
// runtime; they trade every shortcut for obviousness.
namespace sodbench::reference {

// Direct quadruple-loop convolution over an explicitly zero-padded copy.
Tensor conv2d(const Tensor& input, const ConvSpec& spec);

Tensor matmul(const Tensor& a, const Tensor& b);

// Re-binarizes and recounts the confusion table at every threshold.
PRCurve pr_curve(const SaliencyMap& pred, const GroundTruthMask& gt);

double mae(const SaliencyMap& pred, const GroundTruthMask& gt);

double f_mean(const SaliencyMap& pred, const GroundTruthMask& gt,
              const EvalConfig& cfg);

// Dense transcription with an all-pairs nearest-foreground search.
double f_weighted(const SaliencyMap& pred, const GroundTruthMask& gt,
                  const EvalConfig& cfg);

double s_measure(const SaliencyMap& pred, const GroundTruthMask& gt,
                 const EvalConfig& cfg);

double e_measure(const SaliencyMap& pred, const GroundTruthMask& gt,
                 const EvalConfig& cfg);

// Explicit pairwise dot products followed by a per-row softmax.
Tensor pafe_attention(const Tensor& f_in, const ConvSpec& conv);

// Analytic gradients for the gradcheck spot checks.
// d/dx of sum(weights .* conv2d(x)): the adjoint accumulation of the kernel.
Tensor conv2d_weighted_sum_grad(const Tensor& input, const ConvSpec& spec,
                                const Tensor& weights);
// d/dx of sum(sigmoid(x)): sigmoid(x)*(1-sigmoid(x)).
Tensor sigmoid_sum_grad(const Tensor& x);
// d/dx of sum(weights .* softmax_rows(x)) per row: s_i*(w_i - sum_j s_j w_j).
Tensor softmax_weighted_sum_grad(const Tensor& x, const Tensor& weights);

}  // namespace sodbench::reference
