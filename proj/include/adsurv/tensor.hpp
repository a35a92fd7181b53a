#pragma once

#include <cstddef>
#include <vector>

namespace adsurv {

// Dense tensor: a shape plus a flat row-major buffer of doubles. Parameters,
// gradients, and optimizer moments are all stored as these.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape);  // zero-filled
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t ndim() const { return shape_.size(); }
  std::size_t numel() const { return data_.size(); }

  // 2-D convenience; rows()/cols() require ndim == 2.
  std::size_t rows() const;
  std::size_t cols() const;
  double& at(std::size_t r, std::size_t c);
  double at(std::size_t r, std::size_t c) const;

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& flat() { return data_; }
  const std::vector<double>& flat() const { return data_; }

  void fill(double v);
  bool all_finite() const;
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

}  // namespace adsurv
