#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>

namespace dmuq {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
/// Row-major so that a single sample is a contiguous row.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// N samples in R^n, optionally tagged with the sampling interval of the
/// series they came from.
class SampleSet {
 public:
  SampleSet() = default;
  explicit SampleSet(PointMatrix points, std::optional<double> dt = std::nullopt);

  static SampleSet from_column(const Vector& x, std::optional<double> dt = std::nullopt);

  const PointMatrix& points() const noexcept { return points_; }
  std::optional<double> dt() const noexcept { return dt_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(points_.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(points_.cols()); }

  /// Every `stride`-th row starting at `offset`; dt is scaled accordingly.
  SampleSet subsample(std::size_t stride, std::size_t offset = 0) const;

  /// Column j as a vector (coordinate j of every sample).
  Vector coordinate(std::size_t j) const { return points_.col(static_cast<Eigen::Index>(j)); }

 private:
  PointMatrix points_;
  std::optional<double> dt_;
};

}  // namespace dmuq
