#include "dmuq/filter.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace dmuq {
namespace {

void check_diagonal_noise(const Matrix& R, const char* who) {
  require(R.rows() == R.cols() && R.rows() >= 1, ErrorCategory::parameter, std::string(who) + ": R must be square");
  const double scale = R.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < R.rows(); ++i) {
    require(R(i, i) > 0.0 && std::isfinite(R(i, i)), ErrorCategory::parameter,
            std::string(who) + ": noise covariance must have a positive diagonal");
    for (Eigen::Index j = 0; j < R.cols(); ++j)
      require(i == j || std::abs(R(i, j)) <= 1e-14 * scale, ErrorCategory::parameter,
              std::string(who) + ": non-diagonal noise covariance is not supported");
  }
}

}  // namespace

void validate(const ObservationSeries& obs) {
  require(obs.dt > 0.0, ErrorCategory::parameter, "observations: dt must be positive");
  require(obs.Z.rows() == static_cast<Eigen::Index>(obs.times.size()), ErrorCategory::parameter,
          "observations: time and value counts differ");
  require(obs.Z.cols() >= 1, ErrorCategory::parameter, "observations: no observation channels");
  require(obs.R_o.rows() == obs.Z.cols(), ErrorCategory::parameter, "observations: R_o size does not match channels");
  require(obs.Z.allFinite(), ErrorCategory::input, "observations: non-finite observation value");
  check_diagonal_noise(obs.R_o, "observations");
  for (std::size_t k = 1; k < obs.times.size(); ++k) {
    const double step = obs.times[k] - obs.times[k - 1];
    require(std::abs(step - obs.dt) <= 1e-9 * std::max(1.0, obs.dt) + 1e-6 * obs.dt, ErrorCategory::input,
            "observations: non-uniform spacing at row " + std::to_string(k));
  }
}

ObservationSeries make_observations(const Matrix& Z, double dt, const Matrix& R_o) {
  ObservationSeries obs;
  obs.Z = Z;
  obs.dt = dt;
  obs.R_o = R_o;
  obs.times.resize(static_cast<std::size_t>(Z.rows()));
  for (std::size_t k = 0; k < obs.times.size(); ++k) obs.times[k] = static_cast<double>(k + 1) * dt;
  validate(obs);
  return obs;
}

ObservationOperator build_observation_operator(const Matrix& h_on_samples, const GeneratorModel& model) {
  require(h_on_samples.rows() == model.size(), ErrorCategory::parameter,
          "observation operator: h must be evaluated at every training sample");
  require(h_on_samples.allFinite(), ErrorCategory::input, "observation operator: non-finite h value");
  ObservationOperator op;
  op.h_on_samples = h_on_samples;
  const double n = static_cast<double>(model.size());
  for (Eigen::Index k = 0; k < h_on_samples.cols(); ++k) {
    const Matrix weighted = h_on_samples.col(k).asDiagonal() * model.phi;
    Matrix H = model.phi.transpose() * weighted / n;
    const double asym = (H - H.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-6) warn("observation operator: H is asymmetric by " + std::to_string(asym) + "; symmetrizing");
    H = 0.5 * (H + H.transpose()).eval();
    op.H2.push_back(H * H);
    op.H.push_back(std::move(H));
  }
  return op;
}

CoefficientVector assimilate_step(const CoefficientVector& c, const Eigen::VectorXd& dz, const ObservationOperator& op,
                                  const GeneratorModel& model, double dt, const Matrix& R) {
  require(dt > 0.0, ErrorCategory::parameter, "assimilate_step: dt must be positive");
  require(c.size() == model.modes(), ErrorCategory::parameter, "assimilate_step: coefficient length mismatch");
  const auto m = static_cast<Eigen::Index>(op.H.size());
  require(dz.size() == m && R.rows() == m, ErrorCategory::parameter,
          "assimilate_step: observation and operator channel counts differ");
  check_diagonal_noise(R, "assimilate_step");

  const double D = model.diffusion();
  Vector forecast = c.c;
  for (Eigen::Index i = 1; i < forecast.size(); ++i) forecast(i) *= std::exp(D * model.lambdas(i) * dt);

  const Eigen::Index n = c.size();
  Matrix exponent = Matrix::Zero(n, n);
  for (Eigen::Index k = 0; k < m; ++k) {
    const double rinv = 1.0 / R(k, k);
    exponent += (dz(k) * rinv) * op.H[static_cast<std::size_t>(k)];
    exponent -= (0.5 * rinv * dt) * op.H2[static_cast<std::size_t>(k)];
  }
  require(exponent.allFinite(), ErrorCategory::assimilation, "assimilate_step: non-finite update exponent");

  // Gershgorin bound on the top eigenvalue; the shift cancels in the renormalization.
  double shift = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i)
    shift = std::max(shift, exponent(i, i) + (exponent.row(i).cwiseAbs().sum() - std::abs(exponent(i, i))));
  exponent.diagonal().array() -= shift;

  const Matrix update = exponent.exp();
  CoefficientVector out;
  out.c = update * forecast;
  out.t = c.t + dt;
  require(out.c.allFinite(), ErrorCategory::assimilation, "assimilate_step: matrix exponential overflowed");
  const double Z = normalization_constant(out, model);
  require(std::isfinite(Z) && Z > 1e-300, ErrorCategory::assimilation,
          "assimilate_step: posterior normalization collapsed (Z = " + std::to_string(Z) + ")");
  out.c /= Z;
  out.normalized = true;
  return out;
}

FilterResult run_filter(const Vector& p0_on_samples, const ObservationSeries& obs, const ObservationOperator& op,
                        const GeneratorModel& model, const FilterOptions& options) {
  validate(obs);
  require(static_cast<Eigen::Index>(op.H.size()) == obs.channels(), ErrorCategory::parameter,
          "run_filter: observation operator and series have different channel counts");
  const auto dim = static_cast<Eigen::Index>(model.points.dim());
  const auto& x = model.points.points();

  Matrix first(model.modes(), dim);
  std::vector<Vector> second;  // upper triangle of E[x_a x_b]
  for (Eigen::Index a = 0; a < dim; ++a) {
    first.col(a) = observable_coefficients(x.col(a), model);
    for (Eigen::Index b = a; b < dim; ++b)
      second.push_back(observable_coefficients(x.col(a).cwiseProduct(x.col(b)), model));
  }
  const MomentProjector moments(model.points.coordinate(0), model);
  std::vector<Vector> extra;
  for (const auto& A : options.observables) extra.push_back(observable_coefficients(A, model));

  const Matrix R = obs.dt * obs.R_o;
  CoefficientVector c = normalize(project_density(p0_on_samples, model), model);
  FilterResult out;
  out.steps.reserve(obs.size());
  for (std::size_t k = 0; k < obs.size(); ++k) {
    const Eigen::VectorXd dz = obs.Z.row(static_cast<Eigen::Index>(k)).transpose() * obs.dt;
    try {
      c = assimilate_step(c, dz, op, model, obs.dt, R);
    } catch (const Error& e) {
      fail(e.category(), std::string(e.what()) + " (observation " + std::to_string(k) + ", t = " +
                             std::to_string(obs.times[k]) + ")");
    }
    FilterStep step;
    step.t = obs.times[k];
    step.mean = first.transpose() * c.c;
    step.covariance.resize(dim, dim);
    std::size_t s = 0;
    for (Eigen::Index a = 0; a < dim; ++a)
      for (Eigen::Index b = a; b < dim; ++b) {
        const double v = c.c.dot(second[s++]) - step.mean(a) * step.mean(b);
        step.covariance(a, b) = v;
        step.covariance(b, a) = v;
      }
    step.moments = moments(c);
    for (const auto& a : extra) step.expectations.push_back(c.c.dot(a));
    out.steps.push_back(std::move(step));
    if (options.keep_coefficients) out.coefficients.push_back(c.c);
  }
  return out;
}

}  // namespace dmuq
