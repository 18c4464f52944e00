#pragma once

#include <cstdint>
#include <vector>

#include "sodbench/tensor.hpp"

namespace sodbench {

// Rounds [0,1] values to 8-bit levels, half up: round(v*255).
std::uint8_t quantize255(double v);
std::vector<std::uint8_t> quantize255(const Tensor& single_channel);

// Single-channel real-valued saliency prediction, entries in [0,1].
class SaliencyMap {
 public:
  explicit SaliencyMap(Tensor values);

  const Tensor& values() const { return values_; }
  std::size_t height() const { return values_.extent(1); }
  std::size_t width() const { return values_.extent(2); }
  std::size_t pixel_count() const { return values_.size(); }

  // 8-bit quantized view, row-major.
  std::vector<std::uint8_t> quantized() const { return quantize255(values_); }

 private:
  Tensor values_;
};

// Single-channel depth map, entries in [0,1].
class DepthMap {
 public:
  explicit DepthMap(Tensor values);

  const Tensor& values() const { return values_; }
  std::size_t height() const { return values_.extent(1); }
  std::size_t width() const { return values_.extent(2); }

 private:
  Tensor values_;
};

// Strictly binary single-channel mask, entries in {0,1}.
class GroundTruthMask {
 public:
  explicit GroundTruthMask(Tensor values);

  const Tensor& values() const { return values_; }
  std::size_t height() const { return values_.extent(1); }
  std::size_t width() const { return values_.extent(2); }
  std::size_t pixel_count() const { return values_.size(); }
  std::size_t positive_count() const { return positives_; }
  bool empty() const { return positives_ == 0; }
  bool full() const { return positives_ == values_.size(); }

 private:
  Tensor values_;
  std::size_t positives_ = 0;
};

}  // namespace sodbench
