#include "dmuq/response.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace dmuq {

PerturbedWeights perturbed_weights(const Vector& delta_u, double D) {
  require(D > 0.0, ErrorCategory::parameter, "perturbed_weights: D must be positive");
  require(delta_u.size() > 0 && delta_u.allFinite(), ErrorCategory::input, "perturbed_weights: invalid deltaU");
  // Subtracting the minimum keeps exp() finite; the constant cancels in Z_w.
  const double shift = delta_u.minCoeff();
  const Vector raw = (-(delta_u.array() - shift) / D).exp();
  PerturbedWeights out;
  out.Z_w = raw.mean() * std::exp(-shift / D);
  out.w = raw / raw.mean();
  out.ess = out.w.sum() * out.w.sum() / out.w.squaredNorm();
  require(out.w.allFinite(), ErrorCategory::numeric, "perturbed_weights: non-finite weight");
  return out;
}

GeneratorModel build_perturbed_model(const GeneratorModel& model, const Vector& delta_u, std::optional<Eigen::Index> M,
                                     const FitOptions& options) {
  const std::size_t k = std::min(model.points.size() - 1, options.kernel_neighbors);
  return build_perturbed_model(model, knn(model.points, k), delta_u, M, options);
}

GeneratorModel build_perturbed_model(const GeneratorModel& model, const NeighborTable& neighbors,
                                     const Vector& delta_u, std::optional<Eigen::Index> M,
                                     const FitOptions& options) {
  require(model.mode == BandwidthMode::equilibrium, ErrorCategory::parameter,
          "build_perturbed_model: the base model must be an equilibrium model");
  require(delta_u.size() == model.size(), ErrorCategory::input,
          "build_perturbed_model: deltaU must be evaluated at every training sample");
  const double D = model.diffusion();
  const PerturbedWeights weights = perturbed_weights(delta_u, D);
  require(weights.ess >= kMinEffectiveSampleSize, ErrorCategory::importance_weight,
          "build_perturbed_model: importance weights have effective sample size " + std::to_string(weights.ess) +
              " < " + std::to_string(kMinEffectiveSampleSize) + "; the perturbation is too strong for this data set");

  const Eigen::Index modes = M.value_or(model.modes() - 1);
  const Bandwidth bw = build_bandwidth(model.bandwidth_density, BandwidthMode::perturbed, delta_u, D, model.d);
  const AffinityMatrix kernel = build_kernel(model.points, neighbors, bw, model.epsilon, options.kernel_floor);
  const NormalizedKernel normalized = normalize_and_generator(kernel, bw, model.d);
  Eigenbasis basis = eigenbasis(normalized, modes, options.eigen);

  const double n = static_cast<double>(model.size());
  for (Eigen::Index i = 0; i < basis.phi.cols(); ++i) {
    const double norm2 = basis.phi.col(i).cwiseAbs2().dot(weights.w) / n;
    require(norm2 > 0.0 && std::isfinite(norm2), ErrorCategory::numeric,
            "build_perturbed_model: degenerate weighted eigenvector norm");
    basis.phi.col(i) /= std::sqrt(norm2);
  }

  GeneratorModel out;
  out.points = model.points;
  out.q_eps = normalized.q_eps;
  out.density = normalized.q_eps / (n * std::pow(4.0 * std::numbers::pi * model.epsilon, model.d / 2.0));
  out.rho = bw.rho;
  out.bandwidth_density = model.bandwidth_density;
  out.epsilon = model.epsilon;
  out.d = model.d;
  out.lambdas = std::move(basis.lambdas);
  out.phi = std::move(basis.phi);
  out.phi_mean = out.phi.colwise().mean().transpose();
  out.D = D;
  out.mode = BandwidthMode::perturbed;
  out.delta_u = delta_u;
  out.weights = weights.w;
  return out;
}

CoefficientVector response_initial(const GeneratorModel& perturbed) {
  require(perturbed.mode == BandwidthMode::perturbed, ErrorCategory::parameter,
          "response_initial: model is not a perturbed model");
  CoefficientVector c;
  c.c = perturbed.phi.colwise().mean().transpose();
  return c;
}

Vector weighted_observable_coefficients(const GeneratorModel& perturbed, const Vector& A_on_samples) {
  require(A_on_samples.size() == perturbed.size(), ErrorCategory::parameter,
          "response: observable length does not match the sample count");
  require(perturbed.weights.size() == perturbed.size(), ErrorCategory::parameter, "response: model has no weights");
  return perturbed.phi.transpose() * A_on_samples.cwiseProduct(perturbed.weights) /
         static_cast<double>(perturbed.size());
}

std::vector<double> response_curve(const GeneratorModel& perturbed, const Vector& A_on_samples,
                                   const std::vector<double>& times) {
  const double D = perturbed.diffusion();
  const Vector c0 = response_initial(perturbed).c;
  const Vector a = weighted_observable_coefficients(perturbed, A_on_samples);
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) {
    require(t >= 0.0, ErrorCategory::parameter, "response_curve: times must be non-negative");
    double acc = 0.0;
    for (Eigen::Index i = 1; i < perturbed.modes(); ++i) {
      const double rate = D * perturbed.lambdas(i);
      const double decay = rate < 0.0 ? std::exp(rate * t) : 1.0;
      acc += (decay - 1.0) * c0(i) * a(i);
    }
    out.push_back(acc);
  }
  return out;
}

MomentTable response_moments(const GeneratorModel& perturbed, const std::vector<double>& times,
                             std::size_t coordinate) {
  require(coordinate < perturbed.points.dim(), ErrorCategory::parameter, "response_moments: coordinate out of range");
  const Vector x = perturbed.points.coordinate(coordinate);
  const double n = static_cast<double>(x.size());
  Vector power = x;
  std::vector<std::vector<double>> deltas;
  double base[4];
  for (int r = 0; r < 4; ++r) {
    base[r] = power.sum() / n;
    deltas.push_back(response_curve(perturbed, power, times));
    power = power.cwiseProduct(x);
  }
  const Moments reference = centered_from_raw(base[0], base[1], base[2], base[3]);
  MomentTable out;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const Moments m = centered_from_raw(base[0] + deltas[0][k], base[1] + deltas[1][k], base[2] + deltas[2][k],
                                        base[3] + deltas[3][k]);
    out.push_back(times[k], Moments{m.mean - reference.mean, m.m2 - reference.m2, m.m3 - reference.m3,
                                    m.m4 - reference.m4});
  }
  return out;
}

}  // namespace dmuq
