#include "dmuq/oracles.hpp"

#include "dmuq/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace dmuq {
namespace {

std::mt19937_64 member_stream(std::uint64_t seed, std::uint64_t member) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(member), static_cast<std::uint32_t>(member >> 32), 0x9e3779b9u};
  return std::mt19937_64(seq);
}

void check_bounded(double x, std::size_t step) {
  if (!(std::abs(x) <= 1e6))
    fail(ErrorCategory::integration, "integration diverged at step " + std::to_string(step));
}

std::vector<std::size_t> steps_between(std::span<const double> times, double dt_int) {
  require(!times.empty(), ErrorCategory::parameter, "ensemble: no output times");
  std::vector<std::size_t> out;
  double prev = 0.0;
  for (double t : times) {
    require(t >= prev, ErrorCategory::parameter, "ensemble: output times must be non-decreasing and >= 0");
    out.push_back(static_cast<std::size_t>(std::llround((t - prev) / dt_int)));
    prev = t;
  }
  return out;
}

EnsembleResult summarize(std::span<const double> times, const std::vector<std::vector<double>>& snapshots,
                         std::optional<Histogram> histogram) {
  EnsembleResult out;
  for (std::size_t k = 0; k < times.size(); ++k) out.moments.push_back(times[k], sample_moments(snapshots[k]));
  if (histogram) {
    require(histogram->bins >= 1 && histogram->hi > histogram->lo, ErrorCategory::parameter,
            "histogram: invalid binning");
    const double width = (histogram->hi - histogram->lo) / static_cast<double>(histogram->bins);
    histogram->densities.clear();
    for (const auto& snap : snapshots) {
      std::vector<double> density(histogram->bins, 0.0);
      for (double x : snap) {
        const double pos = (x - histogram->lo) / width;
        if (pos >= 0.0 && pos < static_cast<double>(histogram->bins)) density[static_cast<std::size_t>(pos)] += 1.0;
      }
      for (double& v : density) v /= static_cast<double>(snap.size()) * width;
      histogram->densities.push_back(std::move(density));
    }
    out.histogram = std::move(histogram);
  }
  out.final_states = snapshots.back();
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

double SdeSpec::drift(double x) const {
  switch (kind) {
    case SdeKind::ou: return (alpha + a) * x + b;
    case SdeKind::reduced_double_well: return x * (1.0 - x * x);
    case SdeKind::perturbed_reduced_double_well: {
      const double s = x - 0.5;
      return x * (1.0 - x * x) - 20.0 * s * std::exp(-100.0 * s * s);
    }
  }
  return 0.0;
}

double SdeSpec::noise_scale() const {
  if (kind == SdeKind::ou) return std::sqrt(2.0 * D * dt_int);
  return sigma * std::sqrt(dt_int);
}

SampleSet euler_maruyama(const SdeSpec& spec, std::size_t steps, std::size_t record_every) {
  require(steps >= 1, ErrorCategory::parameter, "euler_maruyama: steps must be >= 1");
  require(record_every >= 1, ErrorCategory::parameter, "euler_maruyama: record_every must be >= 1");
  require(spec.dt_int > 0.0, ErrorCategory::parameter, "euler_maruyama: dt_int must be positive");
  require(spec.D >= 0.0 && spec.sigma >= 0.0, ErrorCategory::parameter, "euler_maruyama: negative noise level");

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal;
  const double scale = spec.noise_scale();
  const std::size_t records = steps / record_every;
  require(records >= 2, ErrorCategory::parameter, "euler_maruyama: fewer than 2 recorded states");
  PointMatrix out(static_cast<Eigen::Index>(records), 1);

  double x = spec.x0;
  std::size_t r = 0;
  for (std::size_t step = 1; step <= steps; ++step) {
    x += spec.drift(x) * spec.dt_int + scale * normal(rng);
    check_bounded(x, step);
    if (step % record_every == 0 && r < records) out(static_cast<Eigen::Index>(r++), 0) = x;
  }
  return SampleSet(std::move(out), spec.dt_int * static_cast<double>(record_every));
}

// ---------------------------------------------------------------------------

State4 OdeSpec::rhs(const State4& s) const {
  const double inv_e2 = 1.0 / (eps_scale * eps_scale);
  const auto [x, y1, y2, y3] = s;
  double dx = x - x * x * x + (gamma / eps_scale) * y2;
  if (kind == OdeKind::perturbed_lorenz_double_well) {
    const double c = x - 0.5;
    dx -= 20.0 * c * std::exp(-100.0 * c * c);
  }
  return {dx, 10.0 * inv_e2 * (y2 - y1), inv_e2 * (28.0 * y1 - y2 - y1 * y3), inv_e2 * (y1 * y2 - (8.0 / 3.0) * y3)};
}

State4 OdeSpec::step(const State4& s) const {
  auto axpy = [](const State4& base, const State4& k, double h) {
    return State4{base[0] + h * k[0], base[1] + h * k[1], base[2] + h * k[2], base[3] + h * k[3]};
  };
  const double h = dt_int;
  const State4 k1 = rhs(s);
  const State4 k2 = rhs(axpy(s, k1, h / 2.0));
  const State4 k3 = rhs(axpy(s, k2, h / 2.0));
  const State4 k4 = rhs(axpy(s, k3, h));
  State4 out;
  for (std::size_t i = 0; i < 4; ++i) out[i] = s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

SampleSet rk4(const OdeSpec& spec, std::size_t steps, std::size_t record_every) {
  require(steps >= 1 && record_every >= 1, ErrorCategory::parameter, "rk4: steps and record_every must be >= 1");
  require(spec.eps_scale > 0.0, ErrorCategory::parameter, "rk4: eps_scale must be positive");
  require(spec.dt_int > 0.0, ErrorCategory::parameter, "rk4: dt_int must be positive");
  const std::size_t records = steps / record_every;
  require(records >= 2, ErrorCategory::parameter, "rk4: fewer than 2 recorded states");
  PointMatrix out(static_cast<Eigen::Index>(records), 4);
  State4 s = spec.initial;
  std::size_t r = 0;
  for (std::size_t step = 1; step <= steps; ++step) {
    s = spec.step(s);
    if (step % record_every == 0) {
      for (double v : s) check_bounded(v, step);
      if (r < records)
        for (Eigen::Index c = 0; c < 4; ++c) out(static_cast<Eigen::Index>(r), c) = s[static_cast<std::size_t>(c)];
      ++r;
    }
  }
  return SampleSet(std::move(out), spec.dt_int * static_cast<double>(record_every));
}

// ---------------------------------------------------------------------------

Moments analytic_ou_moments(double alpha, double a, double b, double D, const Moments& initial, double t) {
  const double r = alpha + a;
  require(r < 0.0, ErrorCategory::unstable_parameter, "analytic_ou_moments: alpha + a must be negative");
  const double mean_inf = -b / r;
  const double e1 = std::exp(r * t);
  const double e2 = e1 * e1;
  const double shifted_m2 = initial.m2 + D / r;
  Moments m;
  m.mean = (initial.mean - mean_inf) * e1 + mean_inf;
  m.m2 = shifted_m2 * e2 - D / r;
  m.m3 = initial.m3 * e2 * e1;
  m.m4 = (initial.m4 + 6.0 * D / r * shifted_m2 - 3.0 * D * D / (r * r)) * e2 * e2 - 6.0 * D / r * shifted_m2 * e2 +
         3.0 * D * D / (r * r);
  return m;
}

Moments analytic_ou_response(double alpha, double a, double b, double D, double t) {
  const double r = alpha + a;
  require(r < 0.0, ErrorCategory::unstable_parameter, "analytic_ou_response: alpha + a must be negative");
  require(alpha < 0.0, ErrorCategory::unstable_parameter, "analytic_ou_response: alpha must be negative");
  const double e2 = std::exp(2.0 * r * t);
  const double e4 = e2 * e2;
  Moments dm;
  dm.mean = -b / r * (1.0 - std::exp(r * t));
  dm.m2 = a * D / (alpha * r) * (1.0 - e2);
  dm.m3 = 0.0;
  dm.m4 = 6.0 * a * D * D / (alpha * r * r) * (e2 - e4) + (3.0 * D * D / (alpha * alpha) - 3.0 * D * D / (r * r)) * (e4 - 1.0);
  return dm;
}

// ---------------------------------------------------------------------------

std::vector<GaussianEstimate> kalman_discrete(std::span<const double> observations, double dt, double R_o,
                                              double alpha, double D, double mean0, double var0) {
  require(R_o > 0.0, ErrorCategory::parameter, "kalman_discrete: R_o must be positive");
  require(dt > 0.0, ErrorCategory::parameter, "kalman_discrete: dt must be positive");
  require(alpha < 0.0, ErrorCategory::unstable_parameter, "kalman_discrete: alpha must be negative");
  const double f = std::exp(alpha * dt);
  const double q = -(D / alpha) * (1.0 - f * f);
  std::vector<GaussianEstimate> out;
  out.reserve(observations.size());
  double m = mean0;
  double p = var0;
  for (double z : observations) {
    m *= f;
    p = f * f * p + q;
    const double gain = p / (p + R_o);
    m += gain * (z - m);
    p *= 1.0 - gain;
    out.push_back({m, p});
  }
  return out;
}

std::vector<GaussianEstimate> enkf(std::span<const double> observations, double dt_obs, double R_o,
                                   const std::function<double(double)>& h, const SdeSpec& model,
                                   std::span<const double> initial_ensemble, const EnkfOptions& options) {
  require(options.ensemble_size >= 2, ErrorCategory::parameter, "enkf: ensemble size must be >= 2");
  require(R_o > 0.0, ErrorCategory::parameter, "enkf: R_o must be positive");
  require(!initial_ensemble.empty(), ErrorCategory::parameter, "enkf: empty initial ensemble");
  const std::size_t n = options.ensemble_size;
  const auto inner_steps = static_cast<std::size_t>(std::llround(dt_obs / model.dt_int));
  require(inner_steps >= 1, ErrorCategory::parameter, "enkf: dt_obs shorter than the integration step");

  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = initial_ensemble[i % initial_ensemble.size()];
  std::vector<std::mt19937_64> streams;
  streams.reserve(n);
  for (std::size_t i = 0; i < n; ++i) streams.push_back(member_stream(options.seed, i));
  std::mt19937_64 obs_rng = member_stream(options.seed, n + 1);
  std::normal_distribution<double> normal;
  const double scale = model.noise_scale();
  const double nn = static_cast<double>(n);

  std::vector<double> hx(n);
  std::vector<GaussianEstimate> out;
  out.reserve(observations.size());
  bool warned = false;
  for (std::size_t k = 0; k < observations.size(); ++k) {
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
      std::normal_distribution<double> local_normal;
      double x = xs[i];
      for (std::size_t s = 0; s < inner_steps; ++s) x += model.drift(x) * model.dt_int + scale * local_normal(streams[i]);
      xs[i] = x;
    }
    double mx = 0.0, mh = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      check_bounded(xs[i], k);
      hx[i] = h(xs[i]);
      mx += xs[i];
      mh += hx[i];
    }
    mx /= nn;
    mh /= nn;
    double cxh = 0.0, chh = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      cxh += (xs[i] - mx) * (hx[i] - mh);
      chh += (hx[i] - mh) * (hx[i] - mh);
    }
    cxh /= nn - 1.0;
    chh /= nn - 1.0;
    const double gain = cxh / (chh + R_o);
    const double sr = std::sqrt(R_o);
    for (std::size_t i = 0; i < n; ++i) xs[i] += gain * (observations[k] + sr * normal(obs_rng) - hx[i]);

    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= nn;
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= nn - 1.0;
    if (var < 1e-24 && !warned) {
      warn("enkf: ensemble collapsed (spread < 1e-12) at step " + std::to_string(k) + "; filter divergence likely");
      warned = true;
    }
    out.push_back({mean, var});
  }
  return out;
}

std::vector<double> synthesize_observations(std::span<const double> truth, const std::function<double(double)>& h,
                                            double R_o, std::uint64_t seed) {
  require(R_o >= 0.0, ErrorCategory::parameter, "synthesize_observations: R_o must be non-negative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> out;
  out.reserve(truth.size());
  const double sr = std::sqrt(R_o);
  for (double x : truth) out.push_back(h(x) + sr * normal(rng));
  return out;
}

// ---------------------------------------------------------------------------

EnsembleResult monte_carlo_sde(const SdeSpec& spec, std::span<const double> initial, std::span<const double> times,
                               std::optional<Histogram> histogram) {
  require(initial.size() >= 100, ErrorCategory::parameter, "monte_carlo_sde: ensemble size must be >= 100");
  const auto gaps = steps_between(times, spec.dt_int);
  const std::size_t n = initial.size();
  std::vector<std::vector<double>> snaps(times.size(), std::vector<double>(n));
  const double scale = spec.noise_scale();

#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    std::mt19937_64 rng = member_stream(spec.seed, i);
    std::normal_distribution<double> normal;
    double x = initial[i];
    for (std::size_t k = 0; k < gaps.size(); ++k) {
      for (std::size_t s = 0; s < gaps[k]; ++s) x += spec.drift(x) * spec.dt_int + scale * normal(rng);
      snaps[k][i] = x;
    }
  }
  for (const auto& snap : snaps)
    for (double x : snap) check_bounded(x, 0);
  return summarize(times, snaps, std::move(histogram));
}

EnsembleResult monte_carlo_ode(const OdeSpec& spec, std::span<const State4> initial, std::span<const double> times,
                               std::optional<Histogram> histogram) {
  require(initial.size() >= 100, ErrorCategory::parameter, "monte_carlo_ode: ensemble size must be >= 100");
  const auto gaps = steps_between(times, spec.dt_int);
  const std::size_t n = initial.size();
  std::vector<std::vector<double>> snaps(times.size(), std::vector<double>(n));

#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    State4 s = initial[i];
    for (std::size_t k = 0; k < gaps.size(); ++k) {
      for (std::size_t st = 0; st < gaps[k]; ++st) s = spec.step(s);
      snaps[k][i] = s[0];
    }
  }
  for (const auto& snap : snaps)
    for (double x : snap) check_bounded(x, 0);
  return summarize(times, snaps, std::move(histogram));
}

}  // namespace dmuq
