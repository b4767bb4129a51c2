#pragma once

#include "dmuq/coords.hpp"

#include <vector>

namespace dmuq {

/// c_i(t) = exp(t D lambda_i) c_i(0), with lambda_0 taken as exactly 0.
/// t may be +infinity (equilibrium read-out).
CoefficientVector propagate(const CoefficientVector& c0, double t, const GeneratorModel& model);

struct ForecastReport {
  MomentTable moments;                  ///< centered moments of the chosen coordinate
  std::vector<std::vector<double>> expectations;  ///< [time][observable]
  std::vector<Vector> snapshots;        ///< reconstructed densities, one per time
  std::vector<CoefficientVector> coefficients;
};

struct ForecastOptions {
  std::size_t coordinate = 0;     ///< coordinate whose moments are reported
  std::vector<Vector> observables;  ///< extra observables on the samples
  bool snapshots = true;
};

ForecastReport forecast_report(const Vector& p0_on_samples, const std::vector<double>& times,
                               const GeneratorModel& model, const ForecastOptions& options = {});

}  // namespace dmuq
