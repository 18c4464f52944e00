#include "sodbench/maps.hpp"

#include <cmath>
#include <stdexcept>

namespace sodbench {

std::uint8_t quantize255(double v) {
  const double scaled = std::floor(v * 255.0 + 0.5);
  if (scaled <= 0.0) return 0;
  if (scaled >= 255.0) return 255;
  return static_cast<std::uint8_t>(scaled);
}

std::vector<std::uint8_t> quantize255(const Tensor& single_channel) {
  std::vector<std::uint8_t> out(single_channel.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = quantize255(single_channel[i]);
  }
  return out;
}

namespace {

void require_single_channel(const Tensor& t, const char* what) {
  require_rank(t, 3, what);
  if (t.extent(0) != 1) {
    throw std::invalid_argument(std::string(what) +
                                " must be single-channel, got shape " +
                                shape_to_string(t.shape()));
  }
}

void require_unit_range(const Tensor& t, const char* what) {
  for (double v : t.data()) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument(std::string(what) +
                                  " entries must lie in [0,1], found " +
                                  std::to_string(v));
    }
  }
}

}  // namespace

SaliencyMap::SaliencyMap(Tensor values) : values_(std::move(values)) {
  require_single_channel(values_, "saliency map");
  require_unit_range(values_, "saliency map");
}

DepthMap::DepthMap(Tensor values) : values_(std::move(values)) {
  require_single_channel(values_, "depth map");
  require_unit_range(values_, "depth map");
}

GroundTruthMask::GroundTruthMask(Tensor values) : values_(std::move(values)) {
  require_single_channel(values_, "ground-truth mask");
  for (double v : values_.data()) {
    if (v == 1.0) {
      ++positives_;
    } else if (v != 0.0) {
      throw std::invalid_argument(
          "ground-truth mask entries must be exactly 0 or 1, found " +
          std::to_string(v));
    }
  }
}

}  // namespace sodbench
