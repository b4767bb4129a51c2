#include "presets.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace dmuq::cli {
namespace {

double to_double(const std::string& s) {
  if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  require(ec == std::errc() && ptr == s.data() + s.size(), ErrorCategory::parse, "cannot parse time '" + s + "'");
  return v;
}

}  // namespace

std::vector<double> parse_times(const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream in(text);
    std::string p;
    while (std::getline(in, p, ':')) parts.push_back(p);
    require(parts.size() == 3, ErrorCategory::parse, "time range must be start:step:stop");
    const double a = to_double(parts[0]), h = to_double(parts[1]), b = to_double(parts[2]);
    require(h > 0.0 && b >= a && std::isfinite(b), ErrorCategory::parameter, "invalid time range " + text);
    const auto n = static_cast<std::size_t>(std::floor((b - a) / h + 1e-9));
    for (std::size_t i = 0; i <= n; ++i) out.push_back(a + static_cast<double>(i) * h);
  } else {
    std::stringstream in(text);
    std::string p;
    while (std::getline(in, p, ',')) out.push_back(to_double(p));
  }
  require(!out.empty(), ErrorCategory::parameter, "empty time list");
  for (double t : out) require(t >= 0.0, ErrorCategory::parameter, "times must be non-negative");
  return out;
}

Vector initial_density(const DensityPreset& preset, const GeneratorModel& model, std::size_t coordinate) {
  require(coordinate < model.points.dim(), ErrorCategory::parameter, "coordinate out of range");
  if (preset.kind == "equilibrium") return model.density;
  const Vector x = model.points.coordinate(coordinate);
  Vector p(x.size());
  if (preset.kind == "gamma") {
    // 4 (x + 1/2) exp(-2 (x + 1/2)) on [-1/2, inf): moments (1/2, 1/2, 1/2, 3/2).
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      const double u = x(j) + 0.5;
      p(j) = u >= 0.0 ? 4.0 * u * std::exp(-2.0 * u) : 0.0;
    }
    return p;
  }
  if (preset.kind == "gaussian") {
    require(preset.variance > 0.0, ErrorCategory::parameter, "gaussian initial density needs variance > 0");
    const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * preset.variance);
    for (Eigen::Index j = 0; j < x.size(); ++j)
      p(j) = norm * std::exp(-(x(j) - preset.mean) * (x(j) - preset.mean) / (2.0 * preset.variance));
    return p;
  }
  fail(ErrorCategory::parameter, "unknown initial density '" + preset.kind + "'");
}

std::function<double(double)> observation_function(const ObservationPreset& preset) {
  if (preset.kind == "linear") return [](double x) { return x; };
  if (preset.kind == "abs") return [](double x) { return std::abs(x); };
  if (preset.kind == "shifted-square") {
    const double s = preset.shift;
    return [s](double x) { return (x - s) * (x - s); };
  }
  fail(ErrorCategory::parameter, "unknown observation function '" + preset.kind + "'");
}

Vector perturbation(const PerturbationPreset& preset, const Vector& x) {
  if (preset.kind == "zero") return Vector::Zero(x.size());
  if (preset.kind == "quadratic") {
    require(preset.a != 0.0, ErrorCategory::parameter, "quadratic perturbation needs a != 0");
    return (preset.a / 2.0) * (x.array() - preset.b / preset.a).square();
  }
  if (preset.kind == "gaussian-well") {
    require(preset.width > 0.0, ErrorCategory::parameter, "gaussian-well perturbation needs width > 0");
    return -preset.amplitude * (-(x.array() - preset.center).square() / preset.width).exp();
  }
  fail(ErrorCategory::parameter, "unknown perturbation '" + preset.kind + "'");
}

}  // namespace dmuq::cli
