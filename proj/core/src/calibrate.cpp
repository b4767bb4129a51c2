#include "dmuq/calibrate.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <string>

namespace dmuq {
namespace {

// FFTW planning is not thread-safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t bytes) : ptr(fftw_malloc(bytes)) {
    if (!ptr) fail(ErrorCategory::numeric, "autocorrelation: out of memory");
  }
  ~FftwBuffer() { fftw_free(ptr); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  void* ptr;
};

}  // namespace

Vector default_observable(const SampleSet& series) {
  const auto& x = series.points();
  Vector s = x.rowwise().sum();
  s.array() -= s.mean();
  const double scale = 1.0 + x.cwiseAbs().maxCoeff();
  const double rms = std::sqrt(s.squaredNorm() / static_cast<double>(s.size()));
  require(rms > 1e-12 * scale, ErrorCategory::observable,
          "default observable (sum of centered coordinates) is identically zero; supply a different observable");
  return s;
}

CorrelationCurve autocorrelation(const Vector& S, double dt, std::optional<std::size_t> max_lag) {
  require(dt > 0.0, ErrorCategory::parameter, "autocorrelation: dt must be positive");
  const auto T = static_cast<std::size_t>(S.size());
  require(T >= 2, ErrorCategory::data, "autocorrelation: series needs at least 2 values");
  const std::size_t lags = std::min(max_lag.value_or(T - 1), T - 1) + 1;

  const std::size_t n = 2 * T;
  const std::size_t nc = n / 2 + 1;
  FftwBuffer real_buf(sizeof(double) * n);
  FftwBuffer cplx_buf(sizeof(fftw_complex) * nc);
  auto* r = static_cast<double*>(real_buf.ptr);
  auto* c = static_cast<fftw_complex*>(cplx_buf.ptr);

  fftw_plan forward;
  fftw_plan backward;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    forward = fftw_plan_dft_r2c_1d(static_cast<int>(n), r, c, FFTW_ESTIMATE);
    backward = fftw_plan_dft_c2r_1d(static_cast<int>(n), c, r, FFTW_ESTIMATE);
  }
  std::copy(S.data(), S.data() + T, r);
  std::fill(r + T, r + n, 0.0);
  fftw_execute(forward);
  for (std::size_t k = 0; k < nc; ++k) {
    c[k][0] = c[k][0] * c[k][0] + c[k][1] * c[k][1];
    c[k][1] = 0.0;
  }
  fftw_execute(backward);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }

  CorrelationCurve out;
  out.lags.resize(lags);
  out.values.resize(lags);
  for (std::size_t j = 0; j < lags; ++j) {
    out.lags[j] = static_cast<double>(j) * dt;
    out.values[j] = r[j] / (static_cast<double>(n) * static_cast<double>(T - j));
  }
  out.c0 = out.values[0];
  return out;
}

CorrelationCurve autocorrelation_direct(const Vector& S, double dt, std::size_t max_lag) {
  require(dt > 0.0, ErrorCategory::parameter, "autocorrelation_direct: dt must be positive");
  const auto T = static_cast<std::size_t>(S.size());
  require(T >= 2, ErrorCategory::data, "autocorrelation_direct: series needs at least 2 values");
  const std::size_t lags = std::min(max_lag, T - 1) + 1;
  CorrelationCurve out;
  out.lags.resize(lags);
  out.values.resize(lags);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t j = 0; j < lags; ++j) {
    double acc = 0.0;
    for (std::size_t t = 0; t + j < T; ++t) acc += S[static_cast<Eigen::Index>(t + j)] * S[static_cast<Eigen::Index>(t)];
    out.lags[j] = static_cast<double>(j) * dt;
    out.values[j] = acc / static_cast<double>(T - j);
  }
  out.c0 = out.values[0];
  return out;
}

double correlation_time(const CorrelationCurve& curve) {
  require(curve.size() >= 2, ErrorCategory::data, "correlation_time: curve needs at least two lags");
  require(curve.c0 > 0.0, ErrorCategory::observable, "correlation_time: C(0) must be positive");
  const auto& v = curve.values;
  const auto& l = curve.lags;
  if (v[1] < 0.0) {
    warn("correlation_time: C(dt) is already negative; integrating over the first lag only");
    return 0.5 * (l[1] - l[0]) * (v[0] + v[1]) / curve.c0;
  }
  std::size_t end = 1;
  while (end < v.size() && v[end] >= 0.0) ++end;
  if (end == v.size()) warn("correlation_time: correlation never turned negative; integrating all available lags");
  double acc = 0.0;
  for (std::size_t j = 1; j < end; ++j) acc += 0.5 * (l[j] - l[j - 1]) * (v[j] + v[j - 1]);
  return acc / curve.c0;
}

DiffusionEstimate estimate_diffusion(const GeneratorModel& model, const Vector& S_on_samples, double T_c,
                                     std::optional<Eigen::Index> M) {
  require(T_c > 0.0, ErrorCategory::parameter, "estimate_diffusion: T_c must be positive");
  require(S_on_samples.size() == model.size(), ErrorCategory::parameter,
          "estimate_diffusion: observable length does not match the model");
  const Eigen::Index modes = M.value_or(model.modes() - 1);
  require(modes >= 1 && modes <= model.modes() - 1, ErrorCategory::parameter,
          "estimate_diffusion: M must lie in [1, " + std::to_string(model.modes() - 1) + "]");

  DiffusionEstimate out;
  out.T_c = T_c;
  out.projections = model.phi.leftCols(modes + 1).transpose() * S_on_samples / static_cast<double>(model.size());
  double num = 0.0;
  double den = 0.0;
  for (Eigen::Index i = 1; i <= modes; ++i) {
    const double lambda = model.lambdas(i);
    require(lambda < 0.0, ErrorCategory::model_quality,
            "estimate_diffusion: lambda_" + std::to_string(i) + " is not negative");
    const double s2 = out.projections(i) * out.projections(i);
    num += s2 / lambda;
    den += s2;
  }
  require(den > 1e-14 * (S_on_samples.squaredNorm() / static_cast<double>(model.size())), ErrorCategory::observable,
          "estimate_diffusion: the observable is orthogonal to every retained mode");
  out.spectral_time = -num / den;
  out.D = out.spectral_time / T_c;
  require(std::isfinite(out.D) && out.D > 0.0, ErrorCategory::numeric, "estimate_diffusion: non-positive D");
  return out;
}

CorrelationCurve model_correlation(const GeneratorModel& model, const Vector& S_on_samples,
                                   const std::vector<double>& taus) {
  const double D = model.diffusion();
  require(S_on_samples.size() == model.size(), ErrorCategory::parameter,
          "model_correlation: observable length does not match the model");
  const Vector s = model.phi.transpose() * S_on_samples / static_cast<double>(model.size());
  CorrelationCurve out;
  out.lags = taus;
  out.values.resize(taus.size());
  for (std::size_t k = 0; k < taus.size(); ++k) {
    double acc = 0.0;
    for (Eigen::Index i = 1; i < model.modes(); ++i) acc += std::exp(D * model.lambdas(i) * taus[k]) * s(i) * s(i);
    out.values[k] = acc;
  }
  double c0 = 0.0;
  for (Eigen::Index i = 1; i < model.modes(); ++i) c0 += s(i) * s(i);
  out.c0 = c0;
  return out;
}

CorrelationCurve msm_correlation(double variance, double T_c, const std::vector<double>& taus) {
  require(variance > 0.0 && T_c > 0.0, ErrorCategory::parameter, "msm_correlation: variance and T_c must be positive");
  CorrelationCurve out;
  out.lags = taus;
  out.c0 = variance;
  for (double t : taus) out.values.push_back(variance * std::exp(-t / T_c));
  return out;
}

Calibration calibrate(GeneratorModel& model, const SampleSet& full_series) {
  require(full_series.dt().has_value(), ErrorCategory::parameter, "calibrate: the series needs a sampling interval");
  require(full_series.dim() == model.points.dim(), ErrorCategory::parameter,
          "calibrate: series and model have different dimensions");
  Calibration out;
  out.empirical = autocorrelation(default_observable(full_series), *full_series.dt());
  const double T_c = correlation_time(out.empirical);
  out.estimate = estimate_diffusion(model, default_observable(model.points), T_c);
  model.D = out.estimate.D;
  return out;
}

}  // namespace dmuq
