#include "dmuq/forecast.hpp"

#include "support.hpp"

#include <cmath>
#include <limits>

using namespace dmuq;

namespace {

CoefficientVector gamma_coefficients(const GeneratorModel& m) {
  const Vector x = m.points.coordinate(0);
  Vector p(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double u = x(j) + 0.5;
    p(j) = u >= 0.0 ? 4.0 * u * std::exp(-2.0 * u) : 0.0;
  }
  return project_density(p, m);
}

}  // namespace

TEST_SUITE("forecast") {
  TEST_CASE("t = 0 is the identity") {
    const GeneratorModel& m = test::ou_model();
    const CoefficientVector c = gamma_coefficients(m);
    CHECK(propagate(c, 0.0, m).c == c.c);
  }

  TEST_CASE("equilibrium coefficients are stationary") {
    const GeneratorModel& m = test::ou_model();
    CoefficientVector c;
    c.c = Vector::Zero(m.modes());
    c.c(0) = 0.8;
    for (double t : {0.1, 3.0, 100.0}) CHECK(propagate(c, t, m).c == c.c);
  }

  TEST_CASE("semigroup property") {
    const GeneratorModel& m = test::ou_model();
    const CoefficientVector c = gamma_coefficients(m);
    const CoefficientVector a = propagate(propagate(c, 0.7, m), 1.1, m);
    const CoefficientVector b = propagate(c, 1.8, m);
    CHECK((a.c - b.c).cwiseAbs().maxCoeff() <= 1e-14 * c.c.cwiseAbs().maxCoeff());
    CHECK(a.t == doctest::Approx(1.8));
  }

  TEST_CASE("long times relax to equilibrium") {
    const GeneratorModel& m = test::ou_model();
    const CoefficientVector c = gamma_coefficients(m);
    const double t = 10.0 / (m.diffusion() * std::abs(m.lambdas(1)));
    const CoefficientVector late = propagate(c, t, m);
    CHECK(late.c(0) == c.c(0));
    CHECK(late.c.tail(m.modes() - 1).cwiseAbs().maxCoeff() <= 1e-4 * std::abs(c.c(0)));
    const CoefficientVector inf = propagate(c, std::numeric_limits<double>::infinity(), m);
    CHECK(inf.c.tail(m.modes() - 1).cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("negative times and a missing D are rejected") {
    const GeneratorModel& m = test::ou_model();
    const CoefficientVector c = gamma_coefficients(m);
    CHECK(test::category_of([&] { propagate(c, -0.1, m); }) == ErrorCategory::parameter);
    GeneratorModel no_d = m;
    no_d.D.reset();
    CHECK(test::category_of([&] { propagate(c, 1.0, no_d); }) == ErrorCategory::parameter);
  }

  TEST_CASE("equilibrium initial gives flat moment curves") {
    const GeneratorModel& m = test::ou_model();
    const ForecastReport r = forecast_report(m.density, {0.0, 0.5, 2.0, 10.0}, m);
    REQUIRE(r.moments.size() == 4);
    const double mc = 3.0 / std::sqrt(static_cast<double>(m.size()));
    for (std::size_t k = 1; k < 4; ++k) {
      CHECK(std::abs(r.moments.rows[k].mean - r.moments.rows[0].mean) <= mc);
      CHECK(r.moments.rows[k].m2 == doctest::Approx(r.moments.rows[0].m2).epsilon(0.05));
    }
    CHECK(r.snapshots.size() == 4);
  }

  TEST_CASE("Gamma forecast follows the closed-form mean at early times") {
    const GeneratorModel& m = test::ou_model();
    const Vector x = m.points.coordinate(0);
    Vector p(x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      const double u = x(j) + 0.5;
      p(j) = u >= 0.0 ? 4.0 * u * std::exp(-2.0 * u) : 0.0;
    }
    ForecastOptions opt;
    opt.observables = {x};
    const ForecastReport r = forecast_report(p, {0.0, 0.5, 1.0, 2.0}, m, opt);
    for (std::size_t k = 0; k < 4; ++k) {
      const double t = r.moments.times[k];
      CHECK(std::abs(r.moments.rows[k].mean - 0.5 * std::exp(-t)) <= 0.05 * 0.5);
      CHECK(r.expectations[k][0] == doctest::Approx(r.moments.rows[k].mean).epsilon(1e-12));
    }
  }

  TEST_CASE("forecast coordinate must exist") {
    const GeneratorModel& m = test::ou_model();
    ForecastOptions opt;
    opt.coordinate = 3;
    CHECK(test::category_of([&] { forecast_report(m.density, {0.0}, m, opt); }) == ErrorCategory::parameter);
  }
}
