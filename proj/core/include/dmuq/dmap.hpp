#pragma once

#include "dmuq/error.hpp"
#include "dmuq/geometry.hpp"
#include "dmuq/sym_eigs.hpp"
#include "dmuq/types.hpp"

#include <optional>
#include <vector>

namespace dmuq {

enum class BandwidthMode { equilibrium, perturbed };

/// Per-sample kernel bandwidth rho(x_j), mean-normalized to 1.
struct Bandwidth {
  Vector rho;
  BandwidthMode mode = BandwidthMode::equilibrium;
  std::optional<Vector> delta_u;
  std::optional<double> D_used;
};

/// Equilibrium: rho ~ density^{-1/2}.
/// Perturbed:   rho ~ density^{-1/2} exp(-deltaU / (D (d+2))).
Bandwidth build_bandwidth(const Vector& density, BandwidthMode mode,
                          const std::optional<Vector>& delta_u = std::nullopt,
                          std::optional<double> D = std::nullopt, double d = 1.0);

struct EpsilonTuning {
  double epsilon = 0.0;
  double d = 0.0;
  std::vector<double> log2_epsilon;  ///< the dyadic grid exponents
  std::vector<double> log_sum;       ///< log S(eps) per grid point
  std::vector<double> slope;         ///< d log S / d log eps (NaN at the two ends)
};

class TuningError : public Error {
 public:
  TuningError(const std::string& message, EpsilonTuning diagnostics)
      : Error(ErrorCategory::tuning, message), diagnostics_(std::move(diagnostics)) {}
  const EpsilonTuning& diagnostics() const noexcept { return diagnostics_; }

 private:
  EpsilonTuning diagnostics_;
};

/// Picks eps on the grid {2^j : j = -30..10} maximizing the log-log slope of
/// S(eps) = N^-2 sum_ij K_eps(x_i, x_j); the intrinsic dimension is twice the
/// maximal slope. Pair sums run over the neighbour table.
EpsilonTuning tune_epsilon(const SampleSet& samples, const NeighborTable& neighbors, const Bandwidth& bandwidth);

/// Sparse symmetric variable-bandwidth Gaussian affinity.
struct AffinityMatrix {
  SparseMatrix K;
  double epsilon = 0.0;
  std::size_t support = 0;  ///< neighbours retained per row before symmetrization
  double floor = 0.0;       ///< entries below this value are dropped
};

inline constexpr double kDefaultKernelFloor = 1e-12;

/// K_ij = exp(-|x_i - x_j|^2 / (4 eps rho_i rho_j)) over the union of both
/// points' neighbour lists, diagonal exactly 1.
AffinityMatrix build_kernel(const SampleSet& samples, const NeighborTable& neighbors, const Bandwidth& bandwidth,
                            double epsilon, double floor = kDefaultKernelFloor);

/// Output of the density normalization step. The generator
/// L = (Khat - I) / (eps rho^2) is materialized on request.
struct NormalizedKernel {
  SparseMatrix K_alpha;
  Vector q_eps;        ///< sum_j K_ij / rho_i^d (unnormalized kernel density estimate)
  Vector q_eps_alpha;  ///< row sums of K_alpha
  Vector rho;
  double epsilon = 0.0;
  double d = 0.0;

  SparseMatrix markov() const;
  SparseMatrix generator() const;
  /// Delta^{1/2} (K_alpha - P) Delta^{1/2}, Delta = diag(1 / (eps rho^2 q_alpha)).
  SparseMatrix symmetric_generator() const;
  /// Delta^{1/2} per sample (maps symmetric eigenvectors back to generator eigenvectors).
  Vector conjugation() const;
};

NormalizedKernel normalize_and_generator(const AffinityMatrix& kernel, const Bandwidth& bandwidth, double d);

struct Eigenbasis {
  Vector lambdas;  ///< descending, lambda_0 ~ 0
  Matrix phi;      ///< N x (M+1), phi_i^T phi_i = N, largest-magnitude entry positive
  EigenRoute route_used = EigenRoute::automatic;
};

/// Zero-eigenvalue budget max(1e-8, 1e-6 |lambda_1|).
double zero_tolerance(const Vector& lambdas);

Eigenbasis eigenbasis(const NormalizedKernel& normalized, Eigen::Index M, const SymEigsOptions& options = {});

/// Fitted nonparametric model: everything needed by the UQ solvers.
struct GeneratorModel {
  SampleSet points;
  Vector density;            ///< q_eps / (N (4 pi eps)^{d/2}): estimate of p_eq at the samples
  Vector q_eps;              ///< raw kernel sum
  Vector rho;                ///< bandwidth used by the kernel
  Vector bandwidth_density;  ///< density the bandwidth was derived from
  double epsilon = 0.0;
  double d = 0.0;
  Vector lambdas;
  Matrix phi;
  std::optional<double> D;
  BandwidthMode mode = BandwidthMode::equilibrium;
  Vector delta_u;  ///< perturbed mode only
  Vector weights;  ///< perturbed mode only: w_j = exp(-deltaU_j / D) / Z_w
  Vector phi_mean;  ///< (1/N) sum_j phi_i(x_j), used by the normalization constant

  Eigen::Index modes() const noexcept { return lambdas.size(); }
  Eigen::Index size() const noexcept { return phi.rows(); }
  double diffusion() const;
};

/// (1 + eps D lambda_i)^{t/eps}: eigenvalues of the discrete semigroup F_eps^{t/eps}.
Vector semigroup_eigenvalues(const GeneratorModel& model, double t);

struct FitOptions {
  std::size_t pilot_k = 8;
  std::size_t kernel_neighbors = 1024;
  Eigen::Index M = 50;
  double kernel_floor = kDefaultKernelFloor;
  SymEigsOptions eigen;
};

/// Intermediate products of a fit, exposed for diagnostics and tests.
struct FitTrace {
  PilotDensity pilot;
  EpsilonTuning pilot_tuning;
  EpsilonTuning tuning;
  Eigen::Index kernel_nonzeros = 0;
};

/// geometry -> pilot bandwidth -> tune -> kernel density estimate ->
/// final bandwidth -> tune -> kernel -> normalization -> eigenbasis.
/// D is left unset (see calibrate).
GeneratorModel fit_generator(const SampleSet& samples, const FitOptions& options = {}, FitTrace* trace = nullptr);

/// Same pipeline, reusing a precomputed neighbour table.
GeneratorModel fit_generator(const SampleSet& samples, const NeighborTable& neighbors, const FitOptions& options = {},
                             FitTrace* trace = nullptr);

}  // namespace dmuq
