#include "sodbench/danet.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "sodbench/tensor_io.hpp"

namespace sodbench {

AttentionMap::AttentionMap(Tensor v) : values(std::move(v)) {
  if (values.rank() == 3) {
    if (values.extent(0) != 1) {
      throw std::invalid_argument(
          "spatial attention map must be single-channel, got shape " +
          shape_to_string(values.shape()));
    }
  } else if (values.rank() == 2) {
    if (values.extent(0) != values.extent(1)) {
      throw std::invalid_argument(
          "pairwise attention map must be square, got shape " +
          shape_to_string(values.shape()));
    }
  } else {
    throw std::invalid_argument("attention map must be (1,H,W) or (N,N), got " +
                                shape_to_string(values.shape()));
  }
}

namespace {

// Depth resized to (H,W) and replicated across `channels`.
Tensor broadcast_depth(const DepthMap& d, std::size_t channels, std::size_t h,
                       std::size_t w) {
  Tensor plane = bilinear_resize(d.values(), h, w);
  Tensor out({channels, h, w});
  for (std::size_t c = 0; c < channels; ++c) {
    std::copy(plane.data().begin(), plane.data().end(),
              out.data().begin() + c * h * w);
  }
  return out;
}

void require_attention_conv(const ConvSpec& conv, std::size_t in_channels) {
  if (conv.in_channels() != in_channels || conv.out_channels() != 1) {
    throw std::invalid_argument(
        "mask-guided attention conv must map " + std::to_string(in_channels) +
        " channels to 1, got kernel " + shape_to_string(conv.kernel.shape()));
  }
}

AttentionMap mask_guided_attention_impl(const Tensor& t, const Tensor* s_prev,
                                        const DepthMap& d,
                                        const ConvSpec& conv) {
  require_rank(t, 3, "transition feature");
  require_attention_conv(conv, t.extent(0));
  Tensor sum = t;
  if (s_prev != nullptr) {
    require_same_shape(t, *s_prev, "transition/decoder features");
    sum = add(sum, *s_prev);
  }
  sum = add(sum, broadcast_depth(d, t.extent(0), t.extent(1), t.extent(2)));
  return AttentionMap(sigmoid(conv2d(sum, conv)));
}

void require_spatial_pair(const AttentionMap& a_m, const DepthMap& d) {
  if (!a_m.is_spatial()) {
    throw std::invalid_argument("expected a spatial (1,H,W) attention map");
  }
  require_same_shape(a_m.values, d.values(), "attention/depth maps");
}

}  // namespace

AttentionMap mask_guided_attention(const Tensor& t, const Tensor& s_prev,
                                   const DepthMap& d, const ConvSpec& conv) {
  return mask_guided_attention_impl(t, &s_prev, d, conv);
}

AttentionMap mask_guided_attention(const Tensor& t, const DepthMap& d,
                                   const ConvSpec& conv) {
  return mask_guided_attention_impl(t, nullptr, d, conv);
}

AttentionMap depth_enhanced_saliency_attention(const AttentionMap& a_m,
                                               const DepthMap& d) {
  require_spatial_pair(a_m, d);
  Tensor out(a_m.values.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double a = a_m.values[i];
    out[i] = a * a + a * d.values()[i];
  }
  return AttentionMap(std::move(out));
}

AttentionMap depth_enhanced_background_attention(const AttentionMap& a_m,
                                                 const DepthMap& d) {
  require_spatial_pair(a_m, d);
  Tensor out(a_m.values.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double a = 1.0 - a_m.values[i];
    out[i] = a * a + a * d.values()[i];
  }
  return AttentionMap(std::move(out));
}

Tensor deda_gradient(const AttentionMap& a_m, const DepthMap& d) {
  require_spatial_pair(a_m, d);
  Tensor out(a_m.values.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = 2.0 * a_m.values[i] + d.values()[i];
  }
  return out;
}

Tensor apply_dual_attention(const Tensor& feature, const AttentionMap& a) {
  require_rank(feature, 3, "feature");
  if (!a.is_spatial()) {
    throw std::invalid_argument("apply_dual_attention needs a spatial map");
  }
  if (feature.extent(1) != a.height() || feature.extent(2) != a.width()) {
    throw std::invalid_argument("apply_dual_attention: spatial mismatch " +
                                shape_to_string(feature.shape()) + " vs " +
                                shape_to_string(a.values.shape()));
  }
  const std::size_t hw = a.height() * a.width();
  Tensor out(feature.shape());
  for (std::size_t c = 0; c < feature.extent(0); ++c) {
    for (std::size_t i = 0; i < hw; ++i) {
      out[c * hw + i] = feature[c * hw + i] * a.values[i];
    }
  }
  return out;
}

SaliencyMap residual_fuse(const Tensor& saliency_logits,
                          const Tensor& background_logits,
                          ResidualFuseMode mode) {
  require_same_shape(saliency_logits, background_logits,
                     "fore-/back-ground logits");
  require_rank(saliency_logits, 3, "saliency logits");
  Tensor fused(saliency_logits.shape());
  for (std::size_t i = 0; i < fused.size(); ++i) {
    const double s = saliency_logits[i];
    const double b = background_logits[i];
    double logit = 0.0;
    switch (mode) {
      case ResidualFuseMode::kSaliencyPlusResidual:
        logit = s + (s - b);
        break;
      case ResidualFuseMode::kDifference:
        logit = s - b;
        break;
      case ResidualFuseMode::kBackgroundComplement:
        logit = s + (1.0 - sigmoid_scalar(b));
        break;
    }
    fused[i] = sigmoid_scalar(logit);
  }
  return SaliencyMap(std::move(fused));
}

namespace {

void require_pafe_conv(const ConvSpec& conv, std::size_t channels,
                       const char* what) {
  if (conv.in_channels() != channels || conv.out_channels() != channels ||
      conv.kernel_h() != 1 || conv.kernel_w() != 1) {
    throw std::invalid_argument(
        std::string(what) + " must be a channel-preserving 1x1 conv over " +
        std::to_string(channels) + " channels, got kernel " +
        shape_to_string(conv.kernel.shape()));
  }
}

// (C,H,W) -> (C,N) view; data is already laid out that way.
Tensor flatten_positions(const Tensor& f) {
  return Tensor({f.extent(0), f.extent(1) * f.extent(2)}, f.data());
}

}  // namespace

AttentionMap pafe_attention(const Tensor& f_in, const ConvSpec& conv) {
  require_rank(f_in, 3, "attention input");
  require_pafe_conv(conv, f_in.extent(0), "attention conv");
  Tensor projected = flatten_positions(conv2d(f_in, conv));
  const std::size_t c = projected.extent(0);
  const std::size_t n = projected.extent(1);
  // Gram matrix G^T x G of the (C,N) projection.
  Tensor logits({n, n});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t ch = 0; ch < c; ++ch) {
        dot += projected[ch * n + i] * projected[ch * n + j];
      }
      logits.at(i, j) = dot;
    }
  }
  return AttentionMap(softmax_rows(logits));
}

Tensor pafe_branch(const Tensor& f_in, const ConvSpec& conv_att,
                   const ConvSpec& conv_val) {
  require_rank(f_in, 3, "branch input");
  require_pafe_conv(conv_val, f_in.extent(0), "value conv");
  AttentionMap attention = pafe_attention(f_in, conv_att);
  Tensor value = flatten_positions(conv2d(f_in, conv_val));
  const std::size_t n = value.extent(1);
  if (attention.values.extent(0) != n) {
    throw std::invalid_argument("attention size does not match feature size");
  }
  // value x A^T, then restore (C,H,W) and add the residual input.
  Tensor a_t({n, n});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      a_t.at(i, j) = attention.values.at(j, i);
    }
  }
  Tensor mixed = matmul(value, a_t);
  Tensor out(f_in.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f_in[i] + mixed[i];
  return out;
}

PafeConfig make_pafe_config(std::size_t in_ch, std::size_t branch_ch,
                            std::size_t out_ch, std::uint64_t seed) {
  PafeConfig cfg;
  cfg.dilation_rates = {2, 4, 6};
  cfg.conv_1x1 = make_he_conv(branch_ch, in_ch, 1, 1, seed);
  std::uint64_t s = seed + 1;
  for (int rate : cfg.dilation_rates) {
    PafeBranchConfig branch{
        make_he_conv(branch_ch, in_ch, 3, rate, s),
        make_he_conv(branch_ch, branch_ch, 1, 1, s + 1),
        make_he_conv(branch_ch, branch_ch, 1, 1, s + 2),
    };
    cfg.dilated.push_back(std::move(branch));
    s += 3;
  }
  // concat: 1x1 branch + dilated branches + untouched GAP channels
  const std::size_t concat_ch = branch_ch * 4 + in_ch;
  cfg.fuse = make_he_conv(out_ch, concat_ch, 1, 1, s);
  return cfg;
}

void validate_pafe_config(const PafeConfig& cfg, std::size_t in_channels) {
  if (cfg.dilation_rates.size() != cfg.dilated.size()) {
    throw std::invalid_argument(
        "pafe config: " + std::to_string(cfg.dilation_rates.size()) +
        " dilation rates but " + std::to_string(cfg.dilated.size()) +
        " dilated branches");
  }
  if (cfg.conv_1x1.in_channels() != in_channels ||
      cfg.conv_1x1.kernel_h() != 1 || cfg.conv_1x1.kernel_w() != 1) {
    throw std::invalid_argument("pafe config: 1x1 branch conv must be 1x1 over "
                                "the input channels");
  }
  std::size_t concat_ch = cfg.conv_1x1.out_channels() + in_channels;
  for (std::size_t k = 0; k < cfg.dilated.size(); ++k) {
    const PafeBranchConfig& b = cfg.dilated[k];
    const int rate = cfg.dilation_rates[k];
    if (rate < 1) {
      throw std::invalid_argument("pafe config: dilation rates must be >= 1");
    }
    if (b.spatial.in_channels() != in_channels ||
        b.spatial.dilation != rate ||
        b.spatial.padding != same_padding(
                                 static_cast<int>(b.spatial.kernel_h()), rate) ||
        b.spatial.stride != 1) {
      throw std::invalid_argument(
          "pafe config: dilated branch " + std::to_string(k) +
          " must be a same-padding stride-1 conv with dilation " +
          std::to_string(rate));
    }
    const std::size_t branch_ch = b.spatial.out_channels();
    require_pafe_conv(b.attention, branch_ch, "pafe branch attention conv");
    if (!cfg.tie_attention_value) {
      require_pafe_conv(b.value, branch_ch, "pafe branch value conv");
    }
    concat_ch += branch_ch;
  }
  if (cfg.fuse.in_channels() != concat_ch || cfg.fuse.kernel_h() != 1 ||
      cfg.fuse.kernel_w() != 1) {
    throw std::invalid_argument(
        "pafe config: fuse conv must be 1x1 over the " +
        std::to_string(concat_ch) + "-channel concatenation, got kernel " +
        shape_to_string(cfg.fuse.kernel.shape()));
  }
}

Tensor pafe_module(const Tensor& f_top, const PafeConfig& cfg) {
  require_rank(f_top, 3, "pafe input");
  validate_pafe_config(cfg, f_top.extent(0));
  const std::size_t h = f_top.extent(1);
  const std::size_t w = f_top.extent(2);

  std::vector<Tensor> branches;
  branches.push_back(conv2d(f_top, cfg.conv_1x1));
  for (const PafeBranchConfig& b : cfg.dilated) {
    Tensor feat = conv2d(f_top, b.spatial);
    const ConvSpec& value = cfg.tie_attention_value ? b.attention : b.value;
    branches.push_back(pafe_branch(feat, b.attention, value));
  }
  // global-average branch, replicated back to the input resolution
  Tensor pooled = global_avg_pool(f_top);
  Tensor gap({f_top.extent(0), h, w});
  for (std::size_t c = 0; c < f_top.extent(0); ++c) {
    std::fill(gap.data().begin() + c * h * w,
              gap.data().begin() + (c + 1) * h * w, pooled[c]);
  }
  branches.push_back(std::move(gap));

  return conv2d(concat_channels(branches), cfg.fuse);
}

namespace {

constexpr std::size_t kFirstLayerChannels = 64;

void require_first_layer(const ConvSpec& conv, std::size_t in_ch) {
  if (conv.out_channels() != kFirstLayerChannels) {
    throw std::invalid_argument("first layer must emit 64 channels, got " +
                                std::to_string(conv.out_channels()));
  }
  if (conv.in_channels() != in_ch) {
    throw std::invalid_argument(
        "first layer expects " + std::to_string(in_ch) +
        " input channels, got " + std::to_string(conv.in_channels()));
  }
}

}  // namespace

FusionVariant make_cat_he_variant(std::uint64_t seed) {
  return FusionVariant{FusionTag::kCatHe,
                       make_he_conv(kFirstLayerChannels, 4, 3, 1, seed)};
}

FusionVariant make_add_he_variant(std::uint64_t seed) {
  return FusionVariant{FusionTag::kAddHe,
                       make_he_conv(kFirstLayerChannels, 3, 3, 1, seed)};
}

FusionVariant make_add_p_variant(ConvSpec pretrained_first_layer) {
  require_first_layer(pretrained_first_layer, 3);
  return FusionVariant{FusionTag::kAddP, std::move(pretrained_first_layer)};
}

Tensor early_fusion_first_layer(const Tensor& rgb, const DepthMap& depth,
                                const FusionVariant& variant) {
  require_rank(rgb, 3, "rgb input");
  if (rgb.extent(0) != 3) {
    throw std::invalid_argument("rgb input must have 3 channels, got shape " +
                                shape_to_string(rgb.shape()));
  }
  if (depth.height() != rgb.extent(1) || depth.width() != rgb.extent(2)) {
    throw std::invalid_argument("depth map " +
                                shape_to_string(depth.values().shape()) +
                                " does not match rgb " +
                                shape_to_string(rgb.shape()));
  }
  if (variant.tag == FusionTag::kCatHe) {
    require_first_layer(variant.first_layer, 4);
    return conv2d(concat_channels({rgb, depth.values()}),
                  variant.first_layer);
  }
  require_first_layer(variant.first_layer, 3);
  const std::size_t hw = rgb.extent(1) * rgb.extent(2);
  Tensor fused(rgb.shape());
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < hw; ++i) {
      fused[c * hw + i] = rgb[c * hw + i] + depth.values()[i];
    }
  }
  return conv2d(fused, variant.first_layer);
}

double bce_loss(const SaliencyMap& pred, const GroundTruthMask& gt) {
  require_same_shape(pred.values(), gt.values(), "prediction/ground truth");
  constexpr double kClamp = 1e-7;
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.pixel_count(); ++i) {
    const double p =
        std::min(std::max(pred.values()[i], kClamp), 1.0 - kClamp);
    const double g = gt.values()[i];
    sum -= g * std::log(p) + (1.0 - g) * std::log(1.0 - p);
  }
  return sum / static_cast<double>(pred.pixel_count());
}

double poly_lr(double base_lr, int iter, int max_iter, double power) {
  if (max_iter < 1) {
    throw std::invalid_argument("poly_lr: max_iter must be >= 1");
  }
  if (iter < 0 || iter > max_iter) {
    throw std::invalid_argument("poly_lr: iter " + std::to_string(iter) +
                                " outside [0, " + std::to_string(max_iter) +
                                "]");
  }
  const double remaining =
      1.0 - static_cast<double>(iter) / static_cast<double>(max_iter);
  return base_lr * std::pow(remaining, power);
}

WeightBundle load_weight_bundle(const std::filesystem::path& manifest_path) {
  std::ifstream is(manifest_path);
  if (!is) {
    throw std::runtime_error("cannot open weight manifest " +
                             manifest_path.string());
  }
  nlohmann::json doc;
  try {
    is >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("weight manifest " + manifest_path.string() +
                             ": " + e.what());
  }
  if (!doc.is_object()) {
    throw std::runtime_error("weight manifest " + manifest_path.string() +
                             " must be a JSON object");
  }
  const std::filesystem::path base = manifest_path.parent_path();
  WeightBundle bundle;
  for (const auto& [role, entry] : doc.items()) {
    if (!entry.is_object() || !entry.contains("kernel") ||
        !entry.contains("bias")) {
      throw std::runtime_error("weight manifest entry '" + role +
                               "' needs kernel and bias paths");
    }
    Tensor kernel = read_tensor(base / entry.at("kernel").get<std::string>());
    Tensor bias = read_tensor(base / entry.at("bias").get<std::string>());
    bundle.convs.emplace(
        role, make_conv_spec(std::move(kernel), std::move(bias),
                             entry.value("stride", 1), entry.value("padding", 0),
                             entry.value("dilation", 1)));
  }
  return bundle;
}

void save_weight_bundle(const std::filesystem::path& manifest_path,
                        const WeightBundle& bundle) {
  const std::filesystem::path base = manifest_path.parent_path();
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& [role, conv] : bundle.convs) {
    const std::string kernel_file = role + ".kernel.tensor";
    const std::string bias_file = role + ".bias.tensor";
    write_tensor(base / kernel_file, conv.kernel);
    write_tensor(base / bias_file, conv.bias);
    doc[role] = {{"kernel", kernel_file},
                 {"bias", bias_file},
                 {"stride", conv.stride},
                 {"padding", conv.padding},
                 {"dilation", conv.dilation}};
  }
  std::ofstream os(manifest_path);
  if (!os) {
    throw std::runtime_error("cannot write weight manifest " +
                             manifest_path.string());
  }
  os << doc.dump(2) << "\n";
}

}  // namespace sodbench
