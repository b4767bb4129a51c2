#include "dmuq/response.hpp"

#include "support.hpp"

#include <cmath>
#include <random>

using namespace dmuq;

namespace {

Vector quadratic_du(const Vector& x, double a, double b) {
  return (a / 2.0) * (x.array() - b / a).square().matrix();
}

}  // namespace

TEST_SUITE("response") {
  TEST_CASE("zero perturbation gives unit weights") {
    const PerturbedWeights w = perturbed_weights(Vector::Zero(100), 0.5);
    CHECK((w.w.array() - 1.0).abs().maxCoeff() <= 1e-15);
    CHECK(w.Z_w == doctest::Approx(1.0));
    CHECK(w.ess == doctest::Approx(100.0));
  }

  TEST_CASE("weights have unit mean") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g;
    Vector du(1000);
    for (auto& v : du) v = 0.3 * g(rng);
    const PerturbedWeights w = perturbed_weights(du, 0.8);
    CHECK(std::abs(w.w.mean() - 1.0) <= 1e-12);
    CHECK((w.w.array() > 0.0).all());
    CHECK(w.ess < 1000.0);
    CHECK(test::category_of([&] { perturbed_weights(du, 0.0); }) == ErrorCategory::parameter);
  }

  TEST_CASE("zero perturbation keeps the spectrum and starts at e0") {
    const GeneratorModel& m = test::ou_model();
    const GeneratorModel p = build_perturbed_model(m, Vector::Zero(m.size()), 10);
    CHECK(p.mode == BandwidthMode::perturbed);
    CHECK((p.lambdas - m.lambdas.head(11)).cwiseAbs().maxCoeff() <= 1e-8 * std::abs(m.lambdas(10)));
    const CoefficientVector c = response_initial(p);
    CHECK(c.c(0) == doctest::Approx(1.0).epsilon(1e-6));
    for (Eigen::Index i = 1; i < 4; ++i) CHECK(std::abs(c.c(i)) <= 3.0 / std::sqrt(static_cast<double>(m.size())));
  }

  TEST_CASE("perturbed basis has unit weighted norm") {
    const GeneratorModel& m = test::ou_model();
    const Vector x = m.points.coordinate(0);
    const GeneratorModel p = build_perturbed_model(m, quadratic_du(x, -0.1, 0.03), 10);
    const auto n = static_cast<double>(m.size());
    for (Eigen::Index i = 0; i < p.modes(); ++i)
      CHECK(p.phi.col(i).cwiseProduct(p.weights).dot(p.phi.col(i)) / n == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("OU quadratic perturbation scales the leading eigenvalue by (alpha + a) / alpha") {
    const GeneratorModel& m = test::ou_model();
    const Vector x = m.points.coordinate(0);
    const GeneratorModel p = build_perturbed_model(m, quadratic_du(x, -0.1, 0.03), 10);
    const double ratio = p.lambdas(1) / m.lambdas(1);
    CHECK(ratio == doctest::Approx(0.9).epsilon(0.15));
  }

  TEST_CASE("initial response coefficient of a shifted OU equilibrium") {
    // At N = 5000 a tail-localized mode mixes into the perturbed first mode for this shift.
    static const GeneratorModel m = [] {
      GeneratorModel g = fit_generator(test::ou_samples(10000));
      g.D = 1.0;
      return g;
    }();
    const Vector x = m.points.coordinate(0);
    const double a = -0.1, b = 0.3;
    const GeneratorModel p = build_perturbed_model(m, quadratic_du(x, a, b), 5);
    // Perturbed equilibrium is N(b/(1+a), 1/(1+a)); phi_1 is its standardized coordinate,
    // so its mean under N(0, 1) is -(b/(1+a)) sqrt(1+a).
    const double exact = b / std::sqrt(1.0 + a);
    const CoefficientVector c = response_initial(p);
    CHECK(std::abs(std::abs(c.c(1)) - exact) <= 0.1 * exact + 3.0 / std::sqrt(static_cast<double>(m.size())));
  }

  TEST_CASE("response vanishes at t = 0 and excludes the constant mode") {
    const GeneratorModel& m = test::ou_model();
    const Vector x = m.points.coordinate(0);
    const GeneratorModel p = build_perturbed_model(m, quadratic_du(x, -0.1, 0.03), 20);
    const std::vector<double> r = response_curve(p, x, {0.0, 1.0});
    CHECK(r[0] == 0.0);
    CHECK(r[1] != 0.0);
    // A constant observable only projects on mode 0 (up to sampling error), which never moves.
    const std::vector<double> one = response_curve(p, Vector::Ones(m.size()), {5.0});
    const MomentTable mt = response_moments(p, {0.0});
    CHECK(mt.rows[0].mean == 0.0);
    CHECK(mt.rows[0].m2 == 0.0);
    CHECK(std::abs(one[0]) <= 0.05);
  }

  TEST_CASE("weighted observable coefficients") {
    const GeneratorModel& m = test::ou_model();
    const Vector x = m.points.coordinate(0);
    const GeneratorModel p = build_perturbed_model(m, quadratic_du(x, -0.1, 0.03), 5);
    const Vector a = weighted_observable_coefficients(p, x);
    const Vector ref = p.phi.transpose() * x.cwiseProduct(p.weights) / static_cast<double>(m.size());
    CHECK((a - ref).cwiseAbs().maxCoeff() <= 1e-14);
  }

  TEST_CASE("a perturbation with too few effective samples is rejected") {
    const GeneratorModel& m = test::ou_model();
    const Vector x = m.points.coordinate(0);
    const Vector du = -8.0 * x.array().square().matrix();
    CHECK(test::category_of([&] { build_perturbed_model(m, du, 5); }) == ErrorCategory::importance_weight);
  }

  TEST_CASE("perturbing a perturbed model is rejected") {
    const GeneratorModel& m = test::ou_model();
    const GeneratorModel p = build_perturbed_model(m, Vector::Zero(m.size()), 3);
    CHECK(test::category_of([&] { build_perturbed_model(p, Vector::Zero(m.size()), 3); }) ==
          ErrorCategory::parameter);
    CHECK(test::category_of([&] { response_initial(m); }) == ErrorCategory::parameter);
  }
}
