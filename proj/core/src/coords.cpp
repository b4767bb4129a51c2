#include "dmuq/coords.hpp"

#include <cmath>
#include <string>

namespace dmuq {
namespace {

void check_length(const CoefficientVector& c, const GeneratorModel& model, const char* who) {
  require(c.size() == model.modes(), ErrorCategory::parameter,
          std::string(who) + ": coefficient vector has " + std::to_string(c.size()) + " entries, basis has " +
              std::to_string(model.modes()));
}

const Vector& phi_mean(const GeneratorModel& model) {
  require(model.phi_mean.size() == model.modes(), ErrorCategory::parameter, "model is missing its basis means");
  return model.phi_mean;
}

}  // namespace

CoefficientVector project_density(const Vector& p0_on_samples, const GeneratorModel& model) {
  require(p0_on_samples.size() == model.size(), ErrorCategory::input,
          "project_density: density length does not match the sample count");
  require(p0_on_samples.allFinite(), ErrorCategory::input, "project_density: non-finite density value");
  require((p0_on_samples.array() >= 0.0).all(), ErrorCategory::input, "project_density: negative density value");
  require((p0_on_samples.array() > 0.0).any(), ErrorCategory::input, "project_density: density is identically zero");
  require((model.density.array() > 0.0).all(), ErrorCategory::data, "project_density: non-positive density estimate");
  CoefficientVector out;
  const Vector ratio = p0_on_samples.cwiseQuotient(model.density);
  out.c = model.phi.transpose() * ratio / static_cast<double>(model.size());
  return out;
}

Vector reconstruct(const CoefficientVector& c, const GeneratorModel& model) {
  check_length(c, model, "reconstruct");
  return (model.phi * c.c).cwiseProduct(model.density);
}

double normalization_constant(const CoefficientVector& c, const GeneratorModel& model) {
  check_length(c, model, "normalization_constant");
  return c.c.dot(phi_mean(model));
}

CoefficientVector normalize(const CoefficientVector& c, const GeneratorModel& model) {
  const double Z = normalization_constant(c, model);
  require(std::isfinite(Z) && std::abs(Z) >= 1e-12, ErrorCategory::degenerate_density,
          "normalize: normalization constant " + std::to_string(Z) + " is too small");
  CoefficientVector out = c;
  out.c /= Z;
  out.normalized = true;
  return out;
}

Vector observable_coefficients(const Vector& A_on_samples, const GeneratorModel& model) {
  require(A_on_samples.size() == model.size(), ErrorCategory::parameter,
          "observable length does not match the sample count");
  return model.phi.transpose() * A_on_samples / static_cast<double>(model.size());
}

double expectation(const CoefficientVector& c, const Vector& A_on_samples, const GeneratorModel& model) {
  check_length(c, model, "expectation");
  return c.c.dot(observable_coefficients(A_on_samples, model));
}

MomentProjector::MomentProjector(const Vector& x_on_samples, const GeneratorModel& model) {
  Matrix powers(x_on_samples.size(), 4);
  powers.col(0) = x_on_samples;
  for (Eigen::Index r = 1; r < 4; ++r) powers.col(r) = powers.col(r - 1).cwiseProduct(x_on_samples);
  require(powers.rows() == model.size(), ErrorCategory::parameter,
          "moment projector: coordinate length does not match the sample count");
  a = model.phi.transpose() * powers / static_cast<double>(model.size());
}

Moments MomentProjector::operator()(const CoefficientVector& c) const {
  require(c.size() == a.rows(), ErrorCategory::parameter, "moment projector: coefficient length mismatch");
  const Eigen::Vector4d raw = a.transpose() * c.c;
  return centered_from_raw(raw(0), raw(1), raw(2), raw(3));
}

}  // namespace dmuq
