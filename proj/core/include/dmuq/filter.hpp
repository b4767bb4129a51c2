#pragma once

#include "dmuq/coords.hpp"

#include <vector>

namespace dmuq {

/// Discrete observations Z_k = h(x(t_k)) + sqrt(R_o) omega_k on a uniform grid.
struct ObservationSeries {
  std::vector<double> times;
  Matrix Z;    ///< T x m
  Matrix R_o;  ///< m x m, diagonal positive
  double dt = 0.0;

  std::size_t size() const noexcept { return times.size(); }
  Eigen::Index channels() const noexcept { return Z.cols(); }
};

/// Checks uniform spacing, shapes and a diagonal positive R_o.
void validate(const ObservationSeries& obs);

/// Builds the uniform time grid dt, 2 dt, ... for a block of observations.
ObservationSeries make_observations(const Matrix& Z, double dt, const Matrix& R_o);

/// H^k_{ji} = (1/N) sum_l phi_i(x_l) h_k(x_l) phi_j(x_l).
struct ObservationOperator {
  std::vector<Matrix> H;
  std::vector<Matrix> H2;  ///< (H^k)^2
  Matrix h_on_samples;     ///< N x m
};

ObservationOperator build_observation_operator(const Matrix& h_on_samples, const GeneratorModel& model);

/// One splitting-up step: diagonal forecast over dt, then the multiplicative
/// observation update expm(sum_k H^k (R^-1 dz)_k - 1/2 (H^k)^2 (R^-1 1)_k dt),
/// then renormalization. R = dt R_o.
CoefficientVector assimilate_step(const CoefficientVector& c, const Eigen::VectorXd& dz, const ObservationOperator& op,
                                  const GeneratorModel& model, double dt, const Matrix& R);

struct FilterStep {
  double t = 0.0;
  Vector mean;      ///< posterior mean of the state coordinates
  Matrix covariance;
  Moments moments;  ///< of the first coordinate
  std::vector<double> expectations;  ///< extra observables
};

struct FilterResult {
  std::vector<FilterStep> steps;
  std::vector<Vector> coefficients;  ///< filled when requested
};

struct FilterOptions {
  std::vector<Vector> observables;
  bool keep_coefficients = false;
};

FilterResult run_filter(const Vector& p0_on_samples, const ObservationSeries& obs, const ObservationOperator& op,
                        const GeneratorModel& model, const FilterOptions& options = {});

}  // namespace dmuq
