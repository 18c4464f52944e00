#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sodbench/maps.hpp"
#include "sodbench/tensor.hpp"
#include "sodbench/tensor_ops.hpp"

namespace sodbench {

// Spatial attention (1,H,W) or pairwise position attention (N,N).
struct AttentionMap {
  Tensor values;

  explicit AttentionMap(Tensor v);

  bool is_spatial() const { return values.rank() == 3; }
  std::size_t height() const { return values.extent(1); }
  std::size_t width() const { return values.extent(2); }
};

// ---------------------------------------------------------------------------
// Depth-enhanced dual attention
// ---------------------------------------------------------------------------

// Mask-guided attention: sigmoid(conv(t + s_prev + d)), with the depth map
// bilinearly resized to t's spatial size and broadcast across channels.
// The conv must map t's channel count to a single channel. Entries of the
// result lie strictly in (0,1).
AttentionMap mask_guided_attention(const Tensor& t, const Tensor& s_prev,
                                   const DepthMap& d, const ConvSpec& conv);

// Top-level form without a previous decoder state.
AttentionMap mask_guided_attention(const Tensor& t, const DepthMap& d,
                                   const ConvSpec& conv);

// Saliency-branch attention: A_m*A_m + A_m*D, elementwise.
AttentionMap depth_enhanced_saliency_attention(const AttentionMap& a_m,
                                               const DepthMap& d);

// Background-branch attention: (1-A_m)*(1-A_m) + (1-A_m)*D, elementwise.
// Evaluation order matches the saliency branch applied to 1-A_m, so the two
// agree bitwise on complementary inputs.
AttentionMap depth_enhanced_background_attention(const AttentionMap& a_m,
                                                 const DepthMap& d);

// Derivative of the saliency-branch attention with respect to A_m: 2*A_m + D.
Tensor deda_gradient(const AttentionMap& a_m, const DepthMap& d);

// Modulates every channel of `feature` by a (1,H,W) attention map.
Tensor apply_dual_attention(const Tensor& feature, const AttentionMap& a);

// How the final fore-/back-ground logits are combined. The residual form
// sigmoid(s + (s - b)) is the default; the alternatives are kept selectable
// because the combination operator is a modeling choice, not a fixed one.
enum class ResidualFuseMode {
  kSaliencyPlusResidual,   // sigmoid(s + (s - b))
  kDifference,             // sigmoid(s - b)
  kBackgroundComplement,   // sigmoid(s + (1 - sigmoid(b)))
};

SaliencyMap residual_fuse(
    const Tensor& saliency_logits, const Tensor& background_logits,
    ResidualFuseMode mode = ResidualFuseMode::kSaliencyPlusResidual);

// ---------------------------------------------------------------------------
// Pyramidally attended feature extraction
// ---------------------------------------------------------------------------

// Pairwise position attention over a (C,H,W) feature: with G the (C,N)
// reshape of conv(f_in), A = softmax(G^T x G) row-normalized; N = H*W.
// The conv must be 1x1 and channel-preserving.
AttentionMap pafe_attention(const Tensor& f_in, const ConvSpec& conv);

// Attention-enhanced branch output:
//   F_out = F_in + R2(R1(conv_val(F_in)) x A^T),  A = pafe_attention(f_in,
//   conv_att).
// Pass the same spec twice to tie the attention and value projections.
Tensor pafe_branch(const Tensor& f_in, const ConvSpec& conv_att,
                   const ConvSpec& conv_val);

struct PafeBranchConfig {
  ConvSpec spatial;    // 3x3 dilated conv feeding the branch
  ConvSpec attention;  // 1x1 projection inside pafe_attention
  ConvSpec value;      // 1x1 value projection of the residual term
};

struct PafeConfig {
  ConvSpec conv_1x1;                  // plain 1x1 branch, no attention
  std::vector<int> dilation_rates;    // one per dilated branch
  std::vector<PafeBranchConfig> dilated;
  ConvSpec fuse;                      // 1x1 over the channel concatenation
  bool tie_attention_value = false;   // reuse the attention conv as value conv
};

// Seeded config with the default [2,4,6] pyramid. Branch convs map
// in_ch -> branch_ch; the fuse conv maps the concatenation to out_ch.
PafeConfig make_pafe_config(std::size_t in_ch, std::size_t branch_ch,
                            std::size_t out_ch, std::uint64_t seed);

void validate_pafe_config(const PafeConfig& cfg, std::size_t in_channels);

// Five-branch pyramid over the top-level feature: 1x1 conv (no attention),
// one attended dilated conv per rate, and a global-average branch replicated
// back to H x W (no attention), concatenated and fused by a 1x1 conv.
Tensor pafe_module(const Tensor& f_top, const PafeConfig& cfg);

// ---------------------------------------------------------------------------
// Early fusion of RGB and depth at the first layer
// ---------------------------------------------------------------------------

enum class FusionTag { kCatHe, kAddHe, kAddP };

// First-layer variant: 4-channel concatenation (CatHe) or element-wise
// addition (AddHe/AddP). Cat/Add-He carry He-initialized weights; AddP loads
// provided pretrained 3-channel weights. All variants emit 64 channels.
struct FusionVariant {
  FusionTag tag;
  ConvSpec first_layer;
};

FusionVariant make_cat_he_variant(std::uint64_t seed);
FusionVariant make_add_he_variant(std::uint64_t seed);
FusionVariant make_add_p_variant(ConvSpec pretrained_first_layer);

Tensor early_fusion_first_layer(const Tensor& rgb, const DepthMap& depth,
                                const FusionVariant& variant);

// ---------------------------------------------------------------------------
// Training-side formulas
// ---------------------------------------------------------------------------

// Mean binary cross-entropy with predictions clamped to [1e-7, 1-1e-7].
double bce_loss(const SaliencyMap& pred, const GroundTruthMask& gt);

// Polynomial decay: base_lr * (1 - iter/max_iter)^power.
double poly_lr(double base_lr, int iter, int max_iter, double power = 0.9);

// ---------------------------------------------------------------------------
// Weight bundles
// ---------------------------------------------------------------------------

// Named conv weights for demo runs. The manifest is a JSON object mapping a
// role (eq1_conv_level_i, pafe_branch_k_att, pafe_branch_k_val, fuse,
// first_layer_variant, ...) to kernel/bias tensor files plus stride, padding
// and dilation; tensor paths are resolved relative to the manifest.
struct WeightBundle {
  std::map<std::string, ConvSpec> convs;
};

WeightBundle load_weight_bundle(const std::filesystem::path& manifest_path);
void save_weight_bundle(const std::filesystem::path& manifest_path,
                        const WeightBundle& bundle);

}  // namespace sodbench
