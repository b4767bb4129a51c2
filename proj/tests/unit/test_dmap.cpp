#include "dmuq/dmap.hpp"

#include "support.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace dmuq;

namespace {

Bandwidth unit_bandwidth(Eigen::Index n) {
  Bandwidth b;
  b.rho = Vector::Ones(n);
  return b;
}

SampleSet embed(const SampleSet& s) {
  const Vector x = s.coordinate(0);
  PointMatrix e(x.size(), 3);
  const double c = 1.0 / std::sqrt(5.0);
  for (Eigen::Index i = 0; i < x.size(); ++i) e.row(i) << c * std::sin(2.0 * x(i)), c * std::cos(2.0 * x(i)), c * x(i);
  return SampleSet(e);
}

EpsilonTuning tune_with_pilot(const SampleSet& s) {
  const NeighborTable nb = knn(s, std::min<std::size_t>(s.size() - 1, 512));
  const PilotDensity p = pilot_density(nb, 8, static_cast<double>(s.dim()));
  return tune_epsilon(s, nb, build_bandwidth(p.q0, BandwidthMode::equilibrium));
}

NormalizedKernel normalized_ou(std::size_t n, EpsilonTuning* tuning_out = nullptr) {
  const SampleSet s = test::ou_samples(n);
  const NeighborTable nb = knn(s, n - 1);
  const PilotDensity p = pilot_density(nb, 8, 1.0);
  const Bandwidth bw = build_bandwidth(p.q0, BandwidthMode::equilibrium);
  const EpsilonTuning t = tune_epsilon(s, nb, bw);
  if (tuning_out) *tuning_out = t;
  return normalize_and_generator(build_kernel(s, nb, bw, t.epsilon), bw, t.d);
}

}  // namespace

TEST_SUITE("dmap") {
  TEST_CASE("bandwidth from a constant density is identically one") {
    const Bandwidth b = build_bandwidth(Vector::Constant(7, 0.3), BandwidthMode::equilibrium);
    CHECK((b.rho.array() - 1.0).abs().maxCoeff() < 1e-15);
  }

  TEST_CASE("perturbed bandwidth with zero deltaU equals the equilibrium one") {
    const Vector q = (Vector(4) << 0.1, 0.5, 2.0, 0.7).finished();
    const Bandwidth a = build_bandwidth(q, BandwidthMode::equilibrium);
    const Bandwidth b = build_bandwidth(q, BandwidthMode::perturbed, Vector::Zero(4), 0.8, 1.0);
    CHECK((a.rho - b.rho).cwiseAbs().maxCoeff() < 1e-15);
  }

  TEST_CASE("perturbed bandwidth closed form") {
    const double D = 0.5, d = 1.0;
    const Vector q = (Vector(2) << 1.0, 4.0).finished();
    const Vector du = (Vector(2) << 0.0, -D * (d + 2.0) * std::log(2.0)).finished();
    const Bandwidth b = build_bandwidth(q, BandwidthMode::perturbed, du, D, d);
    CHECK(b.rho(1) / b.rho(0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(b.rho.mean() == doctest::Approx(1.0).epsilon(1e-14));
  }

  TEST_CASE("bandwidth input validation") {
    CHECK(test::category_of([] { build_bandwidth((Vector(2) << 1.0, 0.0).finished(), BandwidthMode::equilibrium); }) ==
          ErrorCategory::data);
    CHECK(test::category_of([] {
            build_bandwidth(Vector::Ones(2), BandwidthMode::perturbed, Vector::Zero(2), -1.0, 1.0);
          }) == ErrorCategory::parameter);
  }

  TEST_CASE("tuned dimension of one-dimensional OU data") {
    const EpsilonTuning t = tune_with_pilot(test::ou_samples(5000));
    CHECK(t.d >= 0.8);
    CHECK(t.d <= 1.2);
    CHECK(t.epsilon > 0.0);
  }

  TEST_CASE("tuned dimension is unchanged by an isometric embedding into R^3") {
    const EpsilonTuning t = tune_with_pilot(embed(test::ou_samples(5000)));
    CHECK(t.d >= 0.8);
    CHECK(t.d <= 1.2);
  }

  TEST_CASE("dilating the data by 10 scales epsilon by about 100") {
    const SampleSet s = test::ou_samples(3000);
    const EpsilonTuning a = tune_with_pilot(s);
    const EpsilonTuning b = tune_with_pilot(SampleSet(PointMatrix(10.0 * s.points())));
    const double ratio = b.epsilon / a.epsilon;
    // The grid is dyadic, so 100 lands on 64 or 128.
    CHECK(ratio >= 64.0);
    CHECK(ratio <= 128.0);
    CHECK(std::abs(b.d - a.d) <= 0.1);
  }

  TEST_CASE("kernel closed-form entries") {
    const SampleSet same = SampleSet::from_column((Vector(2) << 1.5, 1.5).finished());
    const AffinityMatrix k1 = build_kernel(same, knn(same, 1), unit_bandwidth(2), 0.3);
    CHECK(k1.K.coeff(0, 1) == 1.0);

    // |x_i - x_j|^2 = 4 eps rho_i rho_j with eps = 1, rho = 1.
    const SampleSet pair = SampleSet::from_column((Vector(2) << 0.0, 2.0).finished());
    const AffinityMatrix k2 = build_kernel(pair, knn(pair, 1), unit_bandwidth(2), 1.0);
    CHECK(k2.K.coeff(0, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(k2.K.coeff(0, 0) == 1.0);
    CHECK(k2.K.coeff(1, 1) == 1.0);
  }

  TEST_CASE("kernel is exactly symmetric and matches a direct evaluation") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    PointMatrix p(1000, 2);
    for (Eigen::Index i = 0; i < p.rows(); ++i) p.row(i) << g(rng), g(rng);
    const SampleSet s(p);
    const NeighborTable nb = knn(s, 64);
    Bandwidth bw;
    bw.rho = (pilot_density(nb, 8, 2.0).q0.array().pow(-0.5)).matrix();
    bw.rho /= bw.rho.mean();
    const double eps = 0.05;
    const AffinityMatrix k = build_kernel(s, nb, bw, eps);
    const SparseMatrix kt = k.K.transpose();
    CHECK((k.K - kt).norm() == 0.0);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < k.K.rows(); ++i)
      for (SparseMatrix::InnerIterator it(k.K, i); it; ++it) {
        const Eigen::Index j = it.col();
        const double ref = std::exp(-(p.row(j) - p.row(i)).squaredNorm() / (4.0 * eps * bw.rho(j) * bw.rho(i)));
        worst = std::max(worst, std::abs(it.value() - ref));
      }
    CHECK(worst <= 1e-15);
  }

  TEST_CASE("two identical points give a half-half Markov matrix") {
    const SampleSet same = SampleSet::from_column((Vector(2) << 0.0, 0.0).finished());
    const Bandwidth bw = unit_bandwidth(2);
    const NormalizedKernel nk = normalize_and_generator(build_kernel(same, knn(same, 1), bw, 0.1), bw, 1.0);
    const Matrix khat = Matrix(nk.markov());
    CHECK((khat.array() - 0.5).abs().maxCoeff() < 1e-15);
    const Vector row_sums = Matrix(nk.generator()) * Vector::Ones(2);
    CHECK(row_sums.cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("disconnected kernel graph is rejected") {
    const SampleSet s = SampleSet::from_column((Vector(4) << 0.0, 0.01, 100.0, 100.01).finished());
    const Bandwidth bw = unit_bandwidth(4);
    const AffinityMatrix k = build_kernel(s, knn(s, 1), bw, 1e-3);
    CHECK(test::category_of([&] { normalize_and_generator(k, bw, 1.0); }) == ErrorCategory::connectivity);
  }

  TEST_CASE("Markov rows sum to one and generator rows to zero") {
    const NormalizedKernel nk = normalized_ou(1500);
    const Vector ones = Vector::Ones(1500);
    CHECK(((nk.markov() * ones).array() - 1.0).abs().maxCoeff() <= 1e-12);
    const SparseMatrix L = nk.generator();
    const double scale = (1.0 / (nk.epsilon * nk.rho.array().square())).maxCoeff();
    CHECK((L * ones).cwiseAbs().maxCoeff() <= 1e-8 * scale);
  }

  TEST_CASE("symmetric conjugation reproduces the generator") {
    const NormalizedKernel nk = normalized_ou(800);
    const Vector h = nk.conjugation();
    const Matrix S = Matrix(nk.symmetric_generator());
    const Matrix L = Matrix(nk.generator());
    CHECK((S - S.transpose()).cwiseAbs().maxCoeff() == 0.0);
    // L = Delta^{1/2} S Delta^{-1/2}
    const Matrix back = h.asDiagonal() * S * h.cwiseInverse().asDiagonal();
    CHECK((back - L).cwiseAbs().maxCoeff() <= 1e-9 * L.cwiseAbs().maxCoeff());
  }

  TEST_CASE("kernel density estimate tracks the Gaussian equilibrium") {
    const GeneratorModel& m = test::ou_model();
    const Vector x = m.points.coordinate(0);
    Vector truth(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) truth(i) = test::gaussian_pdf(x(i), 1.0);
    const double rel = (m.density - truth).norm() / truth.norm();
    CHECK(rel < 0.10);
  }

  TEST_CASE("eigenbasis conventions") {
    const GeneratorModel& m = test::ou_model();
    const auto n = static_cast<double>(m.size());
    REQUIRE(m.modes() == 51);
    CHECK(std::abs(m.lambdas(0)) <= zero_tolerance(m.lambdas));
    for (Eigen::Index i = 1; i < m.modes(); ++i) CHECK(m.lambdas(i) <= m.lambdas(i - 1));
    CHECK(m.lambdas.maxCoeff() <= zero_tolerance(m.lambdas));
    for (Eigen::Index i = 0; i < m.modes(); ++i) {
      CHECK(m.phi.col(i).squaredNorm() == doctest::Approx(n).epsilon(1e-12));
      Eigen::Index arg = 0;
      m.phi.col(i).cwiseAbs().maxCoeff(&arg);
      CHECK(m.phi(arg, i) > 0.0);
    }
    const Vector phi0 = m.phi.col(0);
    const double cv = std::sqrt((phi0.array() - phi0.mean()).square().mean()) / phi0.mean();
    CHECK(cv < 1e-6);
  }

  TEST_CASE("leading OU eigenvalue is alpha / D within 15%") {
    const GeneratorModel& m = test::ou_model();
    CHECK(m.lambdas(1) >= -1.15);
    CHECK(m.lambdas(1) <= -0.85);
  }

  TEST_CASE("dense and shift-invert Lanczos routes agree") {
    const NormalizedKernel nk = normalized_ou(1200);
    SymEigsOptions dense, sparse;
    dense.route = EigenRoute::dense;
    sparse.route = EigenRoute::sparse;
    const Eigenbasis a = eigenbasis(nk, 20, dense);
    const Eigenbasis b = eigenbasis(nk, 20, sparse);
    CHECK(a.route_used == EigenRoute::dense);
    CHECK(b.route_used == EigenRoute::sparse);
    const double scale = std::abs(a.lambdas(20));
    CHECK((a.lambdas - b.lambdas).cwiseAbs().maxCoeff() <= 1e-8 * scale);
    // Vectors agree where the eigenvalue is isolated.
    for (Eigen::Index i = 0; i <= 20; ++i) {
      double gap = std::numeric_limits<double>::infinity();
      if (i > 0) gap = std::min(gap, a.lambdas(i - 1) - a.lambdas(i));
      if (i < 20) gap = std::min(gap, a.lambdas(i) - a.lambdas(i + 1));
      if (gap < 1e-3 * scale) continue;
      const double cosine = std::abs(a.phi.col(i).dot(b.phi.col(i))) / (a.phi.col(i).norm() * b.phi.col(i).norm());
      CHECK(cosine >= 1.0 - 1e-8);
    }
  }

  TEST_CASE("spectrum is invariant under rigid motions") {
    const SampleSet base = embed(test::ou_samples(1000));
    const double c = std::cos(0.7), s = std::sin(0.7);
    Eigen::Matrix3d rot;
    rot << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
    PointMatrix moved = base.points() * rot.transpose();
    moved.rowwise() += Eigen::RowVector3d(3.0, -1.0, 2.0);
    FitOptions opt;
    opt.M = 10;
    const GeneratorModel a = fit_generator(base, opt);
    const GeneratorModel b = fit_generator(SampleSet(moved), opt);
    CHECK(a.epsilon == b.epsilon);
    CHECK((a.lambdas - b.lambdas).cwiseAbs().maxCoeff() <= 1e-8 * std::abs(a.lambdas(10)));
  }

  TEST_CASE("semigroup eigenvalues") {
    GeneratorModel m;
    m.epsilon = 0.01;
    m.D = 1.0;
    m.lambdas = (Vector(2) << 0.0, -1.0).finished();
    const Vector at0 = semigroup_eigenvalues(m, 0.0);
    CHECK(at0(0) == 1.0);
    CHECK(at0(1) == 1.0);
    const Vector at_eps = semigroup_eigenvalues(m, 0.01);
    CHECK(at_eps(0) == 1.0);
    CHECK(at_eps(1) == doctest::Approx(0.99).epsilon(1e-14));
    CHECK(std::abs(at_eps(1) - std::exp(-0.01)) < 1e-4);
    CHECK(semigroup_eigenvalues(m, 7.3)(0) == 1.0);
  }

  TEST_CASE("semigroup rejects modes beyond the kernel resolution") {
    GeneratorModel m;
    m.epsilon = 0.01;
    m.D = 1.0;
    m.lambdas = (Vector(3) << 0.0, -1.0, -150.0).finished();
    CHECK(test::category_of([&] { semigroup_eigenvalues(m, 1.0); }) == ErrorCategory::mode_truncation);
    m.D.reset();
    CHECK(test::category_of([&] { semigroup_eigenvalues(m, 1.0); }) == ErrorCategory::parameter);
  }

  TEST_CASE("fit is deterministic") {
    const SampleSet s = test::ou_samples(600);
    FitOptions opt;
    opt.M = 8;
    const GeneratorModel a = fit_generator(s, opt);
    const GeneratorModel b = fit_generator(s, opt);
    CHECK(a.lambdas == b.lambdas);
    CHECK(a.phi == b.phi);
  }
}
