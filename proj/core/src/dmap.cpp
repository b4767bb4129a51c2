#include "dmuq/dmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <string>
#include <vector>

namespace dmuq {

// ---------------------------------------------------------------------------
// Bandwidth

Bandwidth build_bandwidth(const Vector& density, BandwidthMode mode, const std::optional<Vector>& delta_u,
                          std::optional<double> D, double d) {
  require(density.size() > 0, ErrorCategory::data, "build_bandwidth: empty density vector");
  for (Eigen::Index i = 0; i < density.size(); ++i)
    require(std::isfinite(density(i)) && density(i) > 0.0, ErrorCategory::data,
            "build_bandwidth: density entry " + std::to_string(i) + " is not positive");

  Bandwidth out;
  out.mode = mode;
  Vector rho = density.array().rsqrt();
  if (mode == BandwidthMode::perturbed) {
    require(delta_u.has_value() && D.has_value(), ErrorCategory::parameter,
            "build_bandwidth: perturbed mode needs deltaU and D");
    require(*D > 0.0, ErrorCategory::parameter, "build_bandwidth: D must be positive");
    require(d > 0.0, ErrorCategory::parameter, "build_bandwidth: d must be positive");
    require(delta_u->size() == density.size(), ErrorCategory::parameter,
            "build_bandwidth: deltaU length does not match the density");
    rho.array() *= (-delta_u->array() / (*D * (d + 2.0))).exp();
    out.delta_u = *delta_u;
    out.D_used = *D;
  }
  require(rho.allFinite(), ErrorCategory::numeric, "build_bandwidth: non-finite bandwidth");
  out.rho = rho / rho.mean();
  return out;
}

// ---------------------------------------------------------------------------
// Epsilon tuning

EpsilonTuning tune_epsilon(const SampleSet& samples, const NeighborTable& neighbors, const Bandwidth& bandwidth) {
  const auto n = static_cast<Eigen::Index>(samples.size());
  require(neighbors.size() == samples.size(), ErrorCategory::parameter,
          "tune_epsilon: neighbour table does not match the sample set");
  require(bandwidth.rho.size() == n, ErrorCategory::parameter, "tune_epsilon: bandwidth length mismatch");
  if (n < 100) warn("tune_epsilon: fewer than 100 samples; the dimension estimate is unreliable");

  constexpr int kLow = -30;
  constexpr int kHigh = 10;
  constexpr int kCount = kHigh - kLow + 1;
  const auto k = static_cast<Eigen::Index>(neighbors.k());
  const Vector& rho = bandwidth.rho;

  std::vector<double> sums(kCount, 0.0);
#pragma omp parallel
  {
    std::vector<double> local(kCount, 0.0);
#pragma omp for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index m = 0; m < k; ++m) {
        const Eigen::Index j = neighbors.indices(i, m);
        const double arg = neighbors.sq_dists(i, m) / (4.0 * rho(i) * rho(j));
        for (int g = 0; g < kCount; ++g) {
          const double a = arg / std::ldexp(1.0, kLow + g);
          if (a < 745.0) local[static_cast<std::size_t>(g)] += std::exp(-a);
        }
      }
    }
#pragma omp critical
    for (int g = 0; g < kCount; ++g) sums[static_cast<std::size_t>(g)] += local[static_cast<std::size_t>(g)];
  }

  EpsilonTuning out;
  const double nn = static_cast<double>(n);
  for (int g = 0; g < kCount; ++g) {
    out.log2_epsilon.push_back(kLow + g);
    // The diagonal contributes N exactly.
    out.log_sum.push_back(std::log((nn + sums[static_cast<std::size_t>(g)]) / (nn * nn)));
  }
  out.slope.assign(kCount, std::numeric_limits<double>::quiet_NaN());
  int best = -1;
  for (int g = 1; g + 1 < kCount; ++g) {
    const auto gi = static_cast<std::size_t>(g);
    out.slope[gi] = (out.log_sum[gi + 1] - out.log_sum[gi - 1]) / (2.0 * std::numbers::ln2);
    if (best < 0 || out.slope[gi] > out.slope[static_cast<std::size_t>(best)]) best = g;
  }
  out.epsilon = std::ldexp(1.0, kLow + best);
  out.d = 2.0 * out.slope[static_cast<std::size_t>(best)];
  if (best == 1 || best == kCount - 2) {
    throw TuningError("tune_epsilon: slope maximizer eps = 2^" + std::to_string(kLow + best) +
                          " lies on the boundary of the tuning grid",
                      out);
  }
  require(out.d > 0.0, ErrorCategory::tuning, "tune_epsilon: non-positive dimension estimate");
  return out;
}

// ---------------------------------------------------------------------------
// Kernel

AffinityMatrix build_kernel(const SampleSet& samples, const NeighborTable& neighbors, const Bandwidth& bandwidth,
                            double epsilon, double floor) {
  require(epsilon > 0.0, ErrorCategory::parameter, "build_kernel: epsilon must be positive");
  require(floor >= 0.0 && floor < 1.0, ErrorCategory::parameter, "build_kernel: floor must lie in [0, 1)");
  const auto n = static_cast<Eigen::Index>(samples.size());
  require(neighbors.size() == samples.size(), ErrorCategory::parameter,
          "build_kernel: neighbour table does not match the sample set");
  require(bandwidth.rho.size() == n, ErrorCategory::parameter, "build_kernel: bandwidth length mismatch");
  const auto k = static_cast<Eigen::Index>(neighbors.k());
  const auto& x = samples.points();
  const Vector& rho = bandwidth.rho;

  // Reverse adjacency: who lists i as a neighbour.
  std::vector<Eigen::Index> rev_start(static_cast<std::size_t>(n) + 1, 0);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index m = 0; m < k; ++m) ++rev_start[static_cast<std::size_t>(neighbors.indices(i, m)) + 1];
  for (Eigen::Index i = 0; i < n; ++i) rev_start[static_cast<std::size_t>(i) + 1] += rev_start[static_cast<std::size_t>(i)];
  std::vector<std::int32_t> rev(static_cast<std::size_t>(rev_start.back()));
  {
    std::vector<Eigen::Index> fill(rev_start.begin(), rev_start.end() - 1);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index m = 0; m < k; ++m)
        rev[static_cast<std::size_t>(fill[static_cast<std::size_t>(neighbors.indices(i, m))]++)] =
            static_cast<std::int32_t>(i);
  }

  auto row_columns = [&](Eigen::Index i, std::vector<std::int32_t>& cols) {
    cols.clear();
    cols.push_back(static_cast<std::int32_t>(i));
    for (Eigen::Index m = 0; m < k; ++m) cols.push_back(neighbors.indices(i, m));
    for (Eigen::Index r = rev_start[static_cast<std::size_t>(i)]; r < rev_start[static_cast<std::size_t>(i) + 1]; ++r)
      cols.push_back(rev[static_cast<std::size_t>(r)]);
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  };
  auto value = [&](Eigen::Index i, Eigen::Index j) {
    if (i == j) return 1.0;
    return std::exp(-(x.row(i) - x.row(j)).squaredNorm() / (4.0 * epsilon * (rho(i) * rho(j))));
  };

  // Pass 1: count retained entries per row.
  std::vector<Eigen::Index> counts(static_cast<std::size_t>(n), 0);
#pragma omp parallel
  {
    std::vector<std::int32_t> cols;
#pragma omp for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
      row_columns(i, cols);
      Eigen::Index c = 0;
      for (std::int32_t j : cols)
        if (j == i || value(i, j) >= floor) ++c;
      counts[static_cast<std::size_t>(i)] = c;
    }
  }

  AffinityMatrix out;
  out.epsilon = epsilon;
  out.support = neighbors.k();
  out.floor = floor;
  out.K.resize(n, n);
  Eigen::Index nnz = 0;
  for (auto c : counts) nnz += c;
  out.K.resizeNonZeros(nnz);
  auto* outer = out.K.outerIndexPtr();
  outer[0] = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    outer[i + 1] = outer[i] + static_cast<SparseMatrix::StorageIndex>(counts[static_cast<std::size_t>(i)]);

  // Pass 2: fill.
  auto* inner = out.K.innerIndexPtr();
  auto* vals = out.K.valuePtr();
#pragma omp parallel
  {
    std::vector<std::int32_t> cols;
#pragma omp for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
      row_columns(i, cols);
      auto pos = outer[i];
      for (std::int32_t j : cols) {
        const double v = value(i, j);
        if (j == i || v >= floor) {
          inner[pos] = j;
          vals[pos] = v;
          ++pos;
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Normalization

namespace {

void check_connectivity(const SparseMatrix& k) {
  const Eigen::Index n = k.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    bool has_neighbor = false;
    for (SparseMatrix::InnerIterator it(k, i); it; ++it)
      if (it.col() != i && it.value() > 0.0) {
        has_neighbor = true;
        break;
      }
    require(has_neighbor, ErrorCategory::connectivity,
            "kernel row " + std::to_string(i) + " has no off-diagonal entries: point " + std::to_string(i) +
                " is isolated after truncation");
  }
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::queue<Eigen::Index> frontier;
  frontier.push(0);
  seen[0] = 1;
  Eigen::Index reached = 1;
  while (!frontier.empty()) {
    const Eigen::Index i = frontier.front();
    frontier.pop();
    for (SparseMatrix::InnerIterator it(k, i); it; ++it) {
      const auto j = static_cast<std::size_t>(it.col());
      if (!seen[j] && it.value() > 0.0) {
        seen[j] = 1;
        ++reached;
        frontier.push(it.col());
      }
    }
  }
  if (reached != n) {
    Eigen::Index first_unreached = 0;
    while (seen[static_cast<std::size_t>(first_unreached)]) ++first_unreached;
    fail(ErrorCategory::connectivity, "kernel graph is disconnected: point " + std::to_string(first_unreached) +
                                          " is not reachable from point 0 (" + std::to_string(n - reached) +
                                          " points unreachable)");
  }
}

}  // namespace

NormalizedKernel normalize_and_generator(const AffinityMatrix& kernel, const Bandwidth& bandwidth, double d) {
  const SparseMatrix& K = kernel.K;
  const Eigen::Index n = K.rows();
  require(bandwidth.rho.size() == n, ErrorCategory::parameter, "normalize: bandwidth length mismatch");
  require(d > 0.0, ErrorCategory::parameter, "normalize: d must be positive");
  check_connectivity(K);

  NormalizedKernel out;
  out.rho = bandwidth.rho;
  out.epsilon = kernel.epsilon;
  out.d = d;

  const Vector row_sums = K * Vector::Ones(n);
  out.q_eps = row_sums.array() / bandwidth.rho.array().pow(d);

  // alpha = -d/4: K_alpha = K_ij q_i^{d/4} q_j^{d/4}.
  const Vector scale = out.q_eps.array().pow(d / 4.0);
  out.K_alpha = K;
  for (Eigen::Index i = 0; i < n; ++i)
    for (SparseMatrix::InnerIterator it(out.K_alpha, i); it; ++it)
      it.valueRef() = it.value() * (scale(i) * scale(it.col()));
  out.q_eps_alpha = out.K_alpha * Vector::Ones(n);
  require(out.q_eps_alpha.allFinite() && (out.q_eps_alpha.array() > 0.0).all(), ErrorCategory::numeric,
          "normalize: non-positive or non-finite alpha-normalized row sum");
  return out;
}

SparseMatrix NormalizedKernel::markov() const {
  SparseMatrix khat = K_alpha;
  for (Eigen::Index i = 0; i < khat.rows(); ++i)
    for (SparseMatrix::InnerIterator it(khat, i); it; ++it) it.valueRef() = it.value() / q_eps_alpha(i);
  return khat;
}

SparseMatrix NormalizedKernel::generator() const {
  SparseMatrix l = markov();
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    const double inv = 1.0 / (epsilon * rho(i) * rho(i));
    double off = 0.0;
    double* diag = nullptr;
    for (SparseMatrix::InnerIterator it(l, i); it; ++it) {
      if (it.col() == i) {
        diag = &it.valueRef();
      } else {
        it.valueRef() = it.value() * inv;
        off += it.value();
      }
    }
    *diag = -off;
  }
  return l;
}

Vector NormalizedKernel::conjugation() const {
  return (1.0 / (epsilon * rho.array().square() * q_eps_alpha.array())).sqrt();
}

SparseMatrix NormalizedKernel::symmetric_generator() const {
  const Vector h = conjugation();
  SparseMatrix s = K_alpha;
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    double off = 0.0;
    double* diag = nullptr;
    for (SparseMatrix::InnerIterator it(s, i); it; ++it) {
      if (it.col() == i) {
        diag = &it.valueRef();
      } else {
        off += it.value();
        it.valueRef() = it.value() * (h(i) * h(it.col()));
      }
    }
    *diag = -off * h(i) * h(i);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Eigenbasis

double zero_tolerance(const Vector& lambdas) {
  const double l1 = lambdas.size() > 1 ? std::abs(lambdas(1)) : 0.0;
  return std::max(1e-8, 1e-6 * l1);
}

Eigenbasis eigenbasis(const NormalizedKernel& normalized, Eigen::Index M, const SymEigsOptions& options) {
  const Eigen::Index n = normalized.K_alpha.rows();
  require(M >= 0, ErrorCategory::parameter, "eigenbasis: M must be non-negative");
  require(M + 1 <= n, ErrorCategory::parameter,
          "eigenbasis: M + 1 = " + std::to_string(M + 1) + " exceeds N = " + std::to_string(n));

  const SymEigs eig = top_eigenpairs_nsd(normalized.symmetric_generator(), M + 1, options);
  const Vector h = normalized.conjugation();

  Eigenbasis out;
  out.route_used = eig.route_used;
  out.lambdas = eig.values;
  out.phi.resize(n, M + 1);
  const double root_n = std::sqrt(static_cast<double>(n));
  for (Eigen::Index i = 0; i <= M; ++i) {
    Vector phi = h.cwiseProduct(eig.vectors.col(i));
    phi *= root_n / phi.norm();
    Eigen::Index arg = 0;
    phi.cwiseAbs().maxCoeff(&arg);
    if (phi(arg) < 0.0) phi = -phi;
    out.phi.col(i) = phi;
  }

  const double tol0 = zero_tolerance(out.lambdas);
  require(std::abs(out.lambdas(0)) <= tol0, ErrorCategory::model_quality,
          "eigenbasis: lambda_0 = " + std::to_string(out.lambdas(0)) + " is not within " + std::to_string(tol0) +
              " of zero");
  if (M >= 1)
    require(out.lambdas(1) <= tol0, ErrorCategory::model_quality,
            "eigenbasis: lambda_1 = " + std::to_string(out.lambdas(1)) +
                " is positive; the symmetrized generator is not negative semidefinite");
  return out;
}

// ---------------------------------------------------------------------------
// Model

double GeneratorModel::diffusion() const {
  require(D.has_value(), ErrorCategory::parameter, "model has no diffusion coefficient; run calibration first");
  return *D;
}

Vector semigroup_eigenvalues(const GeneratorModel& model, double t) {
  require(t >= 0.0, ErrorCategory::parameter, "semigroup_eigenvalues: t must be non-negative");
  const double D = model.diffusion();
  Vector out(model.modes());
  for (Eigen::Index i = 0; i < model.modes(); ++i) {
    const double xi = 1.0 + model.epsilon * D * model.lambdas(i);
    require(xi > 0.0, ErrorCategory::mode_truncation,
            "semigroup_eigenvalues: 1 + eps D lambda_" + std::to_string(i) +
                " <= 0; retain fewer modes (smaller M) or use a smaller epsilon");
    out(i) = std::pow(xi, t / model.epsilon);
  }
  return out;
}

GeneratorModel fit_generator(const SampleSet& samples, const FitOptions& options, FitTrace* trace) {
  const std::size_t k = std::min(samples.size() - 1, options.kernel_neighbors);
  return fit_generator(samples, knn(samples, k), options, trace);
}

GeneratorModel fit_generator(const SampleSet& samples, const NeighborTable& neighbors, const FitOptions& options,
                             FitTrace* trace) {
  require(neighbors.size() == samples.size(), ErrorCategory::parameter,
          "fit: neighbour table does not match the sample set");
  const std::size_t pilot_k = std::min(options.pilot_k, neighbors.k());
  const double ambient = static_cast<double>(samples.dim());

  // Pilot stage: kNN density -> bandwidth -> (eps, d). The provisional
  // dimension of the pilot is the ambient one until a tuned d is known.
  PilotDensity pilot = pilot_density(neighbors, pilot_k, ambient);
  Bandwidth pilot_bw = build_bandwidth(pilot.q0, BandwidthMode::equilibrium);
  EpsilonTuning pilot_tuning = tune_epsilon(samples, neighbors, pilot_bw);
  if (std::abs(pilot_tuning.d - ambient) > 0.5) {
    pilot = pilot_density(neighbors, pilot_k, pilot_tuning.d);
    pilot_bw = build_bandwidth(pilot.q0, BandwidthMode::equilibrium);
    pilot_tuning = tune_epsilon(samples, neighbors, pilot_bw);
  }
  const AffinityMatrix pilot_kernel =
      build_kernel(samples, neighbors, pilot_bw, pilot_tuning.epsilon, options.kernel_floor);
  const Vector kde = normalize_and_generator(pilot_kernel, pilot_bw, pilot_tuning.d).q_eps;

  // Final stage: bandwidth from the kernel density estimate.
  const Bandwidth bw = build_bandwidth(kde, BandwidthMode::equilibrium);
  const EpsilonTuning tuning = tune_epsilon(samples, neighbors, bw);
  const AffinityMatrix kernel = build_kernel(samples, neighbors, bw, tuning.epsilon, options.kernel_floor);
  const NormalizedKernel normalized = normalize_and_generator(kernel, bw, tuning.d);
  Eigenbasis basis = eigenbasis(normalized, options.M, options.eigen);

  GeneratorModel model;
  model.points = samples;
  model.q_eps = normalized.q_eps;
  const double n = static_cast<double>(samples.size());
  model.density = normalized.q_eps / (n * std::pow(4.0 * std::numbers::pi * tuning.epsilon, tuning.d / 2.0));
  model.rho = bw.rho;
  model.bandwidth_density = kde;
  model.epsilon = tuning.epsilon;
  model.d = tuning.d;
  model.lambdas = std::move(basis.lambdas);
  model.phi = std::move(basis.phi);
  model.phi_mean = model.phi.colwise().mean().transpose();
  model.mode = BandwidthMode::equilibrium;

  if (trace) {
    trace->pilot = std::move(pilot);
    trace->pilot_tuning = std::move(pilot_tuning);
    trace->tuning = tuning;
    trace->kernel_nonzeros = kernel.K.nonZeros();
  }
  return model;
}

}  // namespace dmuq
