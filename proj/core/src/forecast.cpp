#include "dmuq/forecast.hpp"

#include <cmath>

namespace dmuq {

CoefficientVector propagate(const CoefficientVector& c0, double t, const GeneratorModel& model) {
  require(t >= 0.0, ErrorCategory::parameter, "propagate: t must be non-negative");
  require(c0.size() == model.modes(), ErrorCategory::parameter, "propagate: coefficient length mismatch");
  const double D = model.diffusion();
  CoefficientVector out = c0;
  out.t = c0.t + t;
  for (Eigen::Index i = 1; i < out.size(); ++i) {
    const double rate = D * model.lambdas(i);
    if (rate < 0.0) out.c(i) *= std::exp(rate * t);
  }
  return out;
}

ForecastReport forecast_report(const Vector& p0_on_samples, const std::vector<double>& times,
                               const GeneratorModel& model, const ForecastOptions& options) {
  require(options.coordinate < model.points.dim(), ErrorCategory::parameter,
          "forecast_report: coordinate index out of range");
  const CoefficientVector c0 = project_density(p0_on_samples, model);
  const MomentProjector moments(model.points.coordinate(options.coordinate), model);
  std::vector<Vector> obs_coeffs;
  for (const auto& A : options.observables) obs_coeffs.push_back(observable_coefficients(A, model));

  ForecastReport out;
  for (double t : times) {
    const CoefficientVector c = normalize(propagate(c0, t, model), model);
    out.moments.push_back(t, moments(c));
    std::vector<double> row;
    for (const auto& a : obs_coeffs) row.push_back(c.c.dot(a));
    out.expectations.push_back(std::move(row));
    if (options.snapshots) out.snapshots.push_back(reconstruct(c, model));
    out.coefficients.push_back(c);
  }
  return out;
}

}  // namespace dmuq
