#pragma once

#include "dmuq/moments.hpp"
#include "dmuq/types.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace dmuq {

// ---------------------------------------------------------------------------
// Stochastic test systems

enum class SdeKind {
  ou,                             ///< dx = ((alpha + a) x + b) dt + sqrt(2D) dW
  reduced_double_well,            ///< dx = x (1 - x^2) dt + sigma dW
  perturbed_reduced_double_well,  ///< extra drift -20 (x - 0.5) exp(-100 (x - 0.5)^2)
};

/// Reduced double-well noise levels from the homogenization literature.
inline constexpr double kSigmaSquaredHomogenization = 0.113;
inline constexpr double kSigmaSquaredFiltering = 0.126;

struct SdeSpec {
  SdeKind kind = SdeKind::ou;
  double alpha = -1.0;
  double a = 0.0;
  double b = 0.0;
  double D = 1.0;
  double sigma = 0.0;  ///< reduced models only
  double dt_int = 0.01;
  std::uint64_t seed = 1;
  double x0 = 0.0;

  double drift(double x) const;
  /// Standard deviation of the noise increment over one step.
  double noise_scale() const;
};

/// Euler-Maruyama; returns every `record_every`-th state after the initial one.
SampleSet euler_maruyama(const SdeSpec& spec, std::size_t steps, std::size_t record_every);

// ---------------------------------------------------------------------------
// Chaotically driven double well (x, y1, y2, y3)

enum class OdeKind { lorenz_double_well, perturbed_lorenz_double_well };

using State4 = std::array<double, 4>;

struct OdeSpec {
  OdeKind kind = OdeKind::lorenz_double_well;
  double gamma = 4.0 / 90.0;
  double eps_scale = 0.31622776601683794;  ///< sqrt(0.1)
  double dt_int = 0.002;
  State4 initial{0.0, 1.0, 1.0, 25.0};

  State4 rhs(const State4& s) const;
  State4 step(const State4& s) const;  ///< one classical RK4 step
};

/// Classical RK4; rows are (x, y1, y2, y3) recorded every `record_every` steps.
SampleSet rk4(const OdeSpec& spec, std::size_t steps, std::size_t record_every);

// ---------------------------------------------------------------------------
// Closed-form OU moments and response (drift (alpha + a) x + b)

Moments analytic_ou_moments(double alpha, double a, double b, double D, const Moments& initial, double t);

/// Response of (mean, M2, M3, M4) when starting from the unperturbed (a = b = 0)
/// equilibrium. Returned as deltas.
Moments analytic_ou_response(double alpha, double a, double b, double D, double t);

// ---------------------------------------------------------------------------
// Reference filters

struct GaussianEstimate {
  double mean = 0.0;
  double variance = 0.0;
};

/// Discrete-time Kalman filter for the scalar OU process dx = alpha x dt + sqrt(2D) dW
/// observed as Z_k = x(t_k) + sqrt(R_o) omega_k every dt.
std::vector<GaussianEstimate> kalman_discrete(std::span<const double> observations, double dt, double R_o,
                                              double alpha, double D, double mean0, double var0);

struct EnkfOptions {
  std::size_t ensemble_size = 50;
  std::uint64_t seed = 7;
};

/// Stochastic EnKF with perturbed observations. Members are advanced between
/// observation times with Euler-Maruyama on `model`.
std::vector<GaussianEstimate> enkf(std::span<const double> observations, double dt_obs, double R_o,
                                   const std::function<double(double)>& h, const SdeSpec& model,
                                   std::span<const double> initial_ensemble, const EnkfOptions& options = {});

/// Scalar truth plus observation noise: Z_k = h(x_k) + sqrt(R_o) omega_k.
std::vector<double> synthesize_observations(std::span<const double> truth, const std::function<double(double)>& h,
                                            double R_o, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Monte-Carlo ensembles

struct Histogram {
  double lo = -2.0;
  double hi = 2.0;
  std::size_t bins = 80;
  std::vector<std::vector<double>> densities;  ///< one normalized histogram per time
};

struct EnsembleResult {
  MomentTable moments;  ///< moments of the first coordinate
  std::optional<Histogram> histogram;
  std::vector<double> final_states;  ///< first coordinate at the last time
};

/// Ensemble of the scalar SDE; each member owns an RNG stream seeded from (seed, member).
EnsembleResult monte_carlo_sde(const SdeSpec& spec, std::span<const double> initial, std::span<const double> times,
                               std::optional<Histogram> histogram = std::nullopt);

/// Ensemble of the four-dimensional ODE.
EnsembleResult monte_carlo_ode(const OdeSpec& spec, std::span<const State4> initial, std::span<const double> times,
                               std::optional<Histogram> histogram = std::nullopt);

}  // namespace dmuq
