#pragma once

#include "dmuq/coords.hpp"

#include <vector>

namespace dmuq {

/// Importance weights of the perturbed equilibrium against samples of the
/// unperturbed one: w_j = exp(-deltaU_j / D) / Z_w with mean(w) = 1.
struct PerturbedWeights {
  Vector w;
  double Z_w = 0.0;
  double ess = 0.0;  ///< (sum w)^2 / sum w^2
};

inline constexpr double kMinEffectiveSampleSize = 100.0;

PerturbedWeights perturbed_weights(const Vector& delta_u, double D);

/// Re-runs kernel, normalization and eigenbasis with
/// rho ~ q^{-1/2} exp(-deltaU / (D (d+2))), reusing eps, d and D of the
/// unperturbed model. Eigenvectors are scaled to weighted norm 1.
GeneratorModel build_perturbed_model(const GeneratorModel& model, const Vector& delta_u,
                                     std::optional<Eigen::Index> M = std::nullopt,
                                     const FitOptions& options = {});

/// Same, reusing a neighbour table of the model's samples.
GeneratorModel build_perturbed_model(const GeneratorModel& model, const NeighborTable& neighbors,
                                     const Vector& delta_u, std::optional<Eigen::Index> M = std::nullopt,
                                     const FitOptions& options = {});

/// c_i(0) = (1/N) sum_j phi_i(x_j).
CoefficientVector response_initial(const GeneratorModel& perturbed);

/// a_i = (1/N) sum_j A(x_j) w_j phi_i(x_j).
Vector weighted_observable_coefficients(const GeneratorModel& perturbed, const Vector& A_on_samples);

/// deltaE[A](t) = sum_{i>=1} (exp(D lambda_i t) - 1) c_i(0) a_i.
std::vector<double> response_curve(const GeneratorModel& perturbed, const Vector& A_on_samples,
                                   const std::vector<double>& times);

/// Response of the mean and centered moments M2..M4 of one coordinate, from the
/// responses of the raw moments.
MomentTable response_moments(const GeneratorModel& perturbed, const std::vector<double>& times,
                             std::size_t coordinate = 0);

}  // namespace dmuq
