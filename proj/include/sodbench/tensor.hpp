#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace sodbench {

// Dense n-dimensional array of 64-bit reals, row-major with the last axis
// fastest. Shapes follow (channels, height, width) semantics for feature
// maps and (out, in, kh, kw) for convolution kernels.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t extent(std::size_t axis) const;
  std::size_t size() const { return data_.size(); }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  double& operator[](std::size_t flat) { return data_[flat]; }
  double operator[](std::size_t flat) const { return data_[flat]; }

  double& at(std::size_t i0, std::size_t i1) {
    return data_[i0 * shape_[1] + i1];
  }
  double at(std::size_t i0, std::size_t i1) const {
    return data_[i0 * shape_[1] + i1];
  }
  double& at(std::size_t i0, std::size_t i1, std::size_t i2) {
    return data_[(i0 * shape_[1] + i1) * shape_[2] + i2];
  }
  double at(std::size_t i0, std::size_t i1, std::size_t i2) const {
    return data_[(i0 * shape_[1] + i1) * shape_[2] + i2];
  }
  double& at(std::size_t i0, std::size_t i1, std::size_t i2, std::size_t i3) {
    return data_[((i0 * shape_[1] + i1) * shape_[2] + i2) * shape_[3] + i3];
  }
  double at(std::size_t i0, std::size_t i1, std::size_t i2,
            std::size_t i3) const {
    return data_[((i0 * shape_[1] + i1) * shape_[2] + i2) * shape_[3] + i3];
  }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  // True when every stored value is finite.
  bool all_finite() const;

  void fill(double value);

  static Tensor zeros(std::vector<std::size_t> shape);
  static Tensor full(std::vector<std::size_t> shape, double value);

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

std::size_t shape_product(const std::vector<std::size_t>& shape);
std::string shape_to_string(const std::vector<std::size_t>& shape);

// Throws std::invalid_argument when the tensor rank differs from `rank`.
// `what` names the offending argument in the message.
void require_rank(const Tensor& t, std::size_t rank, const std::string& what);
void require_same_shape(const Tensor& a, const Tensor& b,
                        const std::string& what);

// Elementwise arithmetic over equal-shaped tensors.
Tensor add(const Tensor& a, const Tensor& b);
Tensor subtract(const Tensor& a, const Tensor& b);
Tensor multiply(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);

// Concatenates rank-3 (C,H,W) tensors along the channel axis.
Tensor concat_channels(const std::vector<Tensor>& parts);

}  // namespace sodbench
