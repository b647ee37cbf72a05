#pragma once

#include <array>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rio {

using Index = Eigen::Index;
using Complex = std::complex<double>;

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec9 = Eigen::Matrix<double, 9, 1>;
using Mat9 = Eigen::Matrix<double, 9, 9>;

/// Error with a machine-readable category ("degenerate-geometry",
/// "insufficient-points", ...) surfaced by the CLI exit path.
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& what)
      : std::runtime_error(what), category_(std::move(category)) {}

  const std::string& category() const { return category_; }

 private:
  std::string category_;
};

[[noreturn]] inline void fail(std::string category, const std::string& what) {
  throw Error(std::move(category), what);
}

/// Dense rank-4 tensor, row-major in (i0, i1, i2, i3).
template <typename Scalar>
class Tensor4 {
 public:
  Tensor4() : dims_{0, 0, 0, 0} {}

  Tensor4(Index d0, Index d1, Index d2, Index d3)
      : dims_{d0, d1, d2, d3}, data_(static_cast<size_t>(d0 * d1 * d2 * d3)) {}

  Scalar& operator()(Index i0, Index i1, Index i2, Index i3) {
    return data_[offset(i0, i1, i2, i3)];
  }
  const Scalar& operator()(Index i0, Index i1, Index i2, Index i3) const {
    return data_[offset(i0, i1, i2, i3)];
  }

  const std::array<Index, 4>& dims() const { return dims_; }
  Index dim(int axis) const { return dims_[static_cast<size_t>(axis)]; }
  Index size() const { return static_cast<Index>(data_.size()); }

  Scalar* data() { return data_.data(); }
  const Scalar* data() const { return data_.data(); }

  Eigen::Map<Eigen::Vector<Scalar, Eigen::Dynamic>> flat() {
    return {data_.data(), size()};
  }
  Eigen::Map<const Eigen::Vector<Scalar, Eigen::Dynamic>> flat() const {
    return {data_.data(), size()};
  }

  void setZero() { std::fill(data_.begin(), data_.end(), Scalar(0)); }

  bool same_shape(const Tensor4& other) const { return dims_ == other.dims_; }

 private:
  size_t offset(Index i0, Index i1, Index i2, Index i3) const {
    return static_cast<size_t>(((i0 * dims_[1] + i1) * dims_[2] + i2) * dims_[3] + i3);
  }

  std::array<Index, 4> dims_;
  std::vector<Scalar> data_;
};

}  // namespace rio
