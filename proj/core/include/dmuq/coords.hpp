#pragma once

#include "dmuq/dmap.hpp"
#include "dmuq/moments.hpp"

namespace dmuq {

/// Coefficients of a density in the basis psi_i = p_eq phi_i.
struct CoefficientVector {
  Vector c;
  double t = 0.0;
  bool normalized = false;

  Eigen::Index size() const noexcept { return c.size(); }
};

/// c_i = (1/N) sum_j p0(x_j) / q(x_j) phi_i(x_j), with q the model's density estimate.
CoefficientVector project_density(const Vector& p0_on_samples, const GeneratorModel& model);

/// p_M(x_j) = q(x_j) sum_i c_i phi_i(x_j). Negative values are kept.
Vector reconstruct(const CoefficientVector& c, const GeneratorModel& model);

/// Z = sum_i c_i (1/N) sum_j phi_i(x_j).
double normalization_constant(const CoefficientVector& c, const GeneratorModel& model);

CoefficientVector normalize(const CoefficientVector& c, const GeneratorModel& model);

/// a_i = (1/N) A^T phi_i.
Vector observable_coefficients(const Vector& A_on_samples, const GeneratorModel& model);

/// E_p[A] ~ sum_i c_i a_i.
double expectation(const CoefficientVector& c, const Vector& A_on_samples, const GeneratorModel& model);

/// Precomputed a_i for x, x^2, x^3, x^4 of one coordinate.
struct MomentProjector {
  Matrix a;  ///< (M+1) x 4

  explicit MomentProjector(const Vector& x_on_samples, const GeneratorModel& model);
  /// Centered moments from the four raw-moment expectations.
  Moments operator()(const CoefficientVector& c) const;
};

}  // namespace dmuq
