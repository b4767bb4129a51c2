#pragma once

#include "dmuq/dmap.hpp"

#include <optional>
#include <vector>

namespace dmuq {

/// C(tau) on a lag grid starting at 0.
struct CorrelationCurve {
  std::vector<double> lags;
  std::vector<double> values;
  double c0 = 0.0;

  std::size_t size() const noexcept { return lags.size(); }
};

/// Sum of coordinates, centered over the series.
Vector default_observable(const SampleSet& series);

/// Unbiased autocorrelation through the power spectrum (zero-padded, no wrap).
/// Lags 0..max_lag (default: T - 1).
CorrelationCurve autocorrelation(const Vector& S, double dt, std::optional<std::size_t> max_lag = std::nullopt);

/// Lag-average reference: (1/(T-j)) sum_t S_{t+j} S_t.
CorrelationCurve autocorrelation_direct(const Vector& S, double dt, std::size_t max_lag);

/// Trapezoid integral of C/C(0) up to the last lag before C first turns negative.
double correlation_time(const CorrelationCurve& curve);

struct DiffusionEstimate {
  double D = 0.0;
  double T_c = 0.0;
  Vector projections;  ///< (1/N) S^T phi_i, i = 0..M
  double spectral_time = 0.0;  ///< -sum lambda_i^-1 s_i^2 / sum s_i^2, i.e. T_c in units of 1/D
};

/// D = -(1/T_c) sum_{i=1..M} lambda_i^{-1} (S^T phi_i)^2 / sum_{i=1..M} (S^T phi_i)^2.
DiffusionEstimate estimate_diffusion(const GeneratorModel& model, const Vector& S_on_samples, double T_c,
                                     std::optional<Eigen::Index> M = std::nullopt);

/// C(tau) = sum_{i>=1} exp(D lambda_i tau) ((1/N) S^T phi_i)^2.
CorrelationCurve model_correlation(const GeneratorModel& model, const Vector& S_on_samples,
                                   const std::vector<double>& taus);

/// variance * exp(-tau / T_c).
CorrelationCurve msm_correlation(double variance, double T_c, const std::vector<double>& taus);

struct Calibration {
  CorrelationCurve empirical;
  DiffusionEstimate estimate;
};

/// T_c from the full-resolution series, D from the model built on its subsample.
/// The model's D is set on return.
Calibration calibrate(GeneratorModel& model, const SampleSet& full_series);

}  // namespace dmuq
