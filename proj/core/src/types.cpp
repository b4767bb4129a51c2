#include "dmuq/types.hpp"

#include "dmuq/error.hpp"

#include <string>

namespace dmuq {

SampleSet::SampleSet(PointMatrix points, std::optional<double> dt)
    : points_(std::move(points)), dt_(dt) {
  require(points_.rows() >= 2, ErrorCategory::data,
          "sample set needs at least 2 points, got " + std::to_string(points_.rows()));
  require(points_.cols() >= 1, ErrorCategory::data, "sample set needs dimension >= 1");
  require(points_.allFinite(), ErrorCategory::data, "sample set contains non-finite entries");
  if (dt_) require(*dt_ > 0.0, ErrorCategory::parameter, "sampling interval dt must be positive");
}

SampleSet SampleSet::from_column(const Vector& x, std::optional<double> dt) {
  PointMatrix p(x.size(), 1);
  p.col(0) = x;
  return SampleSet(std::move(p), dt);
}

SampleSet SampleSet::subsample(std::size_t stride, std::size_t offset) const {
  require(stride >= 1, ErrorCategory::parameter, "subsample stride must be >= 1");
  const auto n = static_cast<std::size_t>(points_.rows());
  require(offset < n, ErrorCategory::parameter, "subsample offset beyond series length");
  const std::size_t count = (n - offset + stride - 1) / stride;
  PointMatrix out(static_cast<Eigen::Index>(count), points_.cols());
  for (std::size_t i = 0; i < count; ++i)
    out.row(static_cast<Eigen::Index>(i)) = points_.row(static_cast<Eigen::Index>(offset + i * stride));
  std::optional<double> new_dt;
  if (dt_) new_dt = *dt_ * static_cast<double>(stride);
  return SampleSet(std::move(out), new_dt);
}

}  // namespace dmuq
