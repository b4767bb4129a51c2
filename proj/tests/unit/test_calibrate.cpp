#include "dmuq/calibrate.hpp"

#include "support.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace dmuq;

namespace {

/// Exact OU-like model: phi_1 = x (He_1), lambda_1 = -1, higher modes orthogonal to x.
GeneratorModel hermite_model(std::size_t n) {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> g;
  Vector x(static_cast<Eigen::Index>(n));
  for (auto& v : x) v = g(rng);
  x.array() -= x.mean();
  x /= std::sqrt(x.squaredNorm() / static_cast<double>(n));
  GeneratorModel m;
  m.points = SampleSet::from_column(x);
  m.lambdas = (Vector(3) << 0.0, -1.0, -2.0).finished();
  m.phi.resize(x.size(), 3);
  m.phi.col(0).setOnes();
  m.phi.col(1) = x;
  Vector he2 = (x.array().square() - 1.0).matrix();
  he2 -= (he2.dot(x) / x.squaredNorm()) * x;
  he2.array() -= he2.mean();
  he2 *= std::sqrt(static_cast<double>(n)) / he2.norm();
  m.phi.col(2) = he2;
  return m;
}

}  // namespace

TEST_SUITE("calibrate") {
  TEST_CASE("default observable of a scalar series is the centered series") {
    const Vector x = (Vector(4) << 1.0, 2.0, 4.0, 5.0).finished();
    const Vector s = default_observable(SampleSet::from_column(x));
    CHECK((s - (x.array() - 3.0).matrix()).cwiseAbs().maxCoeff() < 1e-15);
  }

  TEST_CASE("default observable rejects antisymmetric pairs and constant series") {
    PointMatrix p(50, 2);
    for (Eigen::Index i = 0; i < 50; ++i) p.row(i) << std::sin(0.3 * i), -std::sin(0.3 * i);
    CHECK(test::category_of([&] { default_observable(SampleSet(p)); }) == ErrorCategory::observable);
    CHECK(test::category_of([] { default_observable(SampleSet::from_column(Vector::Constant(20, 2.5))); }) ==
          ErrorCategory::observable);
  }

  TEST_CASE("FFT autocorrelation equals the direct lag average") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g;
    Vector s(512);
    double ar = 0.0;
    for (auto& v : s) v = ar = 0.8 * ar + g(rng);
    const CorrelationCurve fft = autocorrelation(s, 0.1);
    const CorrelationCurve direct = autocorrelation_direct(s, 0.1, 511);
    REQUIRE(fft.size() == 512);
    REQUIRE(direct.size() == 512);
    double worst = 0.0;
    for (std::size_t j = 0; j < 512; ++j) worst = std::max(worst, std::abs(fft.values[j] - direct.values[j]));
    CHECK(worst <= 1e-8 * direct.c0);
    CHECK(fft.lags[3] == doctest::Approx(0.3));
    CHECK(fft.c0 == fft.values[0]);
  }

  TEST_CASE("white noise decorrelates") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> g;
    Vector s(20000);
    for (auto& v : s) v = g(rng);
    const CorrelationCurve c = autocorrelation(s, 1.0, 50);
    const double bound = 3.0 / std::sqrt(20000.0);
    for (std::size_t j = 1; j <= 50; ++j) CHECK(std::abs(c.values[j]) / c.c0 < bound);
  }

  TEST_CASE("cosine series correlates as a cosine") {
    const double w = 0.37, dt = 0.05;
    Vector s(40000);
    for (Eigen::Index t = 0; t < s.size(); ++t) s(t) = std::cos(w * dt * static_cast<double>(t));
    const CorrelationCurve c = autocorrelation(s, dt, 400);
    const CorrelationCurve d = autocorrelation_direct(s, dt, 400);
    for (std::size_t j = 0; j <= 400; j += 20) {
      CHECK(c.values[j] / c.c0 == doctest::Approx(std::cos(w * dt * static_cast<double>(j))).epsilon(0.01));
      CHECK(c.values[j] == doctest::Approx(d.values[j]).epsilon(1e-8));
    }
  }

  TEST_CASE("correlation time of an exponential") {
    CorrelationCurve c;
    c.c0 = 2.0;
    for (int j = 0; j <= 4000; ++j) {
      c.lags.push_back(0.005 * j);
      c.values.push_back(2.0 * std::exp(-0.005 * j) - (j == 4000 ? 3.0 : 0.0));
    }
    // Trapezoid on [0, 19.995] of e^-tau.
    CHECK(correlation_time(c) == doctest::Approx(1.0).epsilon(1e-4));
  }

  TEST_CASE("correlation time when C(dt) is already negative") {
    CorrelationCurve c;
    c.c0 = 1.0;
    c.lags = {0.0, 0.5, 1.0};
    c.values = {1.0, -0.2, 0.1};
    test::WarningCapture cap;
    CHECK(correlation_time(c) == doctest::Approx(0.5 * 0.5 * (1.0 - 0.2)));
    CHECK(cap.contains("already negative"));
  }

  TEST_CASE("D formula reduces to the MSM relation for an exact Hermite basis") {
    const GeneratorModel m = hermite_model(4000);
    const Vector S = m.points.coordinate(0);
    const double T_c = 0.8;
    const DiffusionEstimate e = estimate_diffusion(m, S, T_c);
    // Only mode 1 carries S, so D = -(1/T_c) / lambda_1.
    CHECK(e.D == doctest::Approx(1.0 / T_c).epsilon(1e-10));
    CHECK(e.spectral_time == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(e.projections(2)) < 1e-12);
  }

  TEST_CASE("estimate_diffusion guards") {
    const GeneratorModel m = hermite_model(500);
    const Vector S = m.points.coordinate(0);
    CHECK(test::category_of([&] { estimate_diffusion(m, S, 0.0); }) == ErrorCategory::parameter);
    CHECK(test::category_of([&] { estimate_diffusion(m, S, 1.0, 5); }) == ErrorCategory::parameter);
    CHECK(test::category_of([&] { estimate_diffusion(m, Vector::Ones(500), 1.0); }) == ErrorCategory::observable);
  }

  TEST_CASE("model correlation: Parseval at zero and decay at infinity") {
    const GeneratorModel& m = test::ou_model();
    const Vector x = m.points.coordinate(0);
    const Vector S = (x.array() - x.mean()).matrix();
    const CorrelationCurve c = model_correlation(m, S, {0.0, 1.0, 200.0});
    const double variance = S.squaredNorm() / static_cast<double>(S.size());
    CHECK(c.values[0] == doctest::Approx(variance).epsilon(0.05));
    CHECK(c.values[1] < c.values[0]);
    CHECK(std::abs(c.values[2]) < 1e-12 * variance);
  }

  TEST_CASE("MSM correlation closed form") {
    const CorrelationCurve c = msm_correlation(2.0, 0.5, {0.0, 0.5, 1.0});
    CHECK(c.values[0] == 2.0);
    CHECK(c.values[1] == doctest::Approx(2.0 / std::numbers::e));
    CHECK(c.values[2] == doctest::Approx(2.0 * std::exp(-2.0)));
    CHECK(test::category_of([] { msm_correlation(-1.0, 1.0, {0.0}); }) == ErrorCategory::parameter);
  }

  TEST_CASE("calibrate measures T_c on the full series and stores D") {
    SdeSpec spec;
    spec.seed = test::kSeed + 1;
    const SampleSet full = euler_maruyama(spec, 200000, 1);
    REQUIRE(full.dt().has_value());
    GeneratorModel m = fit_generator(full.subsample(100));
    const Calibration cal = calibrate(m, full);
    REQUIRE(m.D.has_value());
    CHECK(*m.D == cal.estimate.D);
    CHECK(cal.empirical.lags[1] == doctest::Approx(0.01));
    // Exact T_c is 1; the Euler step and a 2000 T_c record add a few percent.
    CHECK(cal.estimate.T_c == doctest::Approx(1.0).epsilon(0.1));
  }

  TEST_CASE("calibrate needs a sampling interval") {
    GeneratorModel m = hermite_model(200);
    CHECK(test::category_of([&] { calibrate(m, SampleSet::from_column(Vector::LinSpaced(10, 0, 1))); }) ==
          ErrorCategory::parameter);
  }
}
