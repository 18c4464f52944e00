#include "sodbench/tensor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sodbench {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return n;
}

std::string shape_to_string(const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ",";
    os << shape[i];
  }
  os << ")";
  return os.str();
}

namespace {

void validate_shape(const std::vector<std::size_t>& shape) {
  if (shape.empty()) {
    throw std::invalid_argument("tensor shape must have at least one axis");
  }
  for (std::size_t e : shape) {
    if (e == 0) {
      throw std::invalid_argument("tensor extents must be >= 1, got shape " +
                                  shape_to_string(shape));
    }
  }
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
  validate_shape(shape_);
  data_.assign(shape_product(shape_), 0.0);
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  validate_shape(shape_);
  if (shape_product(shape_) != data_.size()) {
    throw std::invalid_argument(
        "tensor data length " + std::to_string(data_.size()) +
        " does not match shape " + shape_to_string(shape_));
  }
}

std::size_t Tensor::extent(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw std::invalid_argument("axis " + std::to_string(axis) +
                                " out of range for shape " +
                                shape_to_string(shape_));
  }
  return shape_[axis];
}

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Tensor::fill(double value) { data_.assign(data_.size(), value); }

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
  return Tensor(std::move(shape));
}

Tensor Tensor::full(std::vector<std::size_t> shape, double value) {
  Tensor t(std::move(shape));
  t.fill(value);
  return t;
}

void require_rank(const Tensor& t, std::size_t rank, const std::string& what) {
  if (t.rank() != rank) {
    throw std::invalid_argument(what + " must have rank " +
                                std::to_string(rank) + ", got shape " +
                                shape_to_string(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b,
                        const std::string& what) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(what + ": shape mismatch " +
                                shape_to_string(a.shape()) + " vs " +
                                shape_to_string(b.shape()));
  }
}

namespace {

template <typename F>
Tensor zip(const Tensor& a, const Tensor& b, const char* what, F&& op) {
  require_same_shape(a, b, what);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = op(a[i], b[i]);
  return Tensor(a.shape(), std::move(out));
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return zip(a, b, "add", [](double x, double y) { return x + y; });
}

Tensor subtract(const Tensor& a, const Tensor& b) {
  return zip(a, b, "subtract", [](double x, double y) { return x - y; });
}

Tensor multiply(const Tensor& a, const Tensor& b) {
  return zip(a, b, "multiply", [](double x, double y) { return x * y; });
}

Tensor scale(const Tensor& a, double factor) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * factor;
  return Tensor(a.shape(), std::move(out));
}

Tensor concat_channels(const std::vector<Tensor>& parts) {
  if (parts.empty()) {
    throw std::invalid_argument("concat_channels: no tensors given");
  }
  std::size_t channels = 0;
  for (const Tensor& p : parts) {
    require_rank(p, 3, "concat_channels input");
    if (p.extent(1) != parts.front().extent(1) ||
        p.extent(2) != parts.front().extent(2)) {
      throw std::invalid_argument(
          "concat_channels: spatial mismatch " +
          shape_to_string(p.shape()) + " vs " +
          shape_to_string(parts.front().shape()));
    }
    channels += p.extent(0);
  }
  Tensor out({channels, parts.front().extent(1), parts.front().extent(2)});
  std::size_t offset = 0;
  for (const Tensor& p : parts) {
    std::copy(p.data().begin(), p.data().end(), out.data().begin() + offset);
    offset += p.size();
  }
  return out;
}

}  // namespace sodbench
