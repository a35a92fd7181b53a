#include "adsurv/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace adsurv {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) {
    if (d == 0) throw std::invalid_argument("tensor dimension must be positive");
    n *= d;
  }
  return n;
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_product(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_product(shape_)) {
    throw std::invalid_argument("tensor data length does not match shape");
  }
}

std::size_t Tensor::rows() const {
  if (shape_.size() != 2) throw std::logic_error("rows(): tensor is not 2-D");
  return shape_[0];
}

std::size_t Tensor::cols() const {
  if (shape_.size() != 2) throw std::logic_error("cols(): tensor is not 2-D");
  return shape_[1];
}

double& Tensor::at(std::size_t r, std::size_t c) {
  return data_[r * cols() + c];
}

double Tensor::at(std::size_t r, std::size_t c) const {
  return data_[r * cols() + c];
}

void Tensor::fill(double v) {
  for (auto& x : data_) x = v;
}

bool Tensor::all_finite() const {
  for (double x : data_) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace adsurv
