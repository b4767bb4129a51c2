#pragma once

#include "dmuq/dmap.hpp"
#include "dmuq/oracles.hpp"

#include <functional>
#include <string>
#include <vector>

namespace dmuq::cli {

/// "0,0.5,2" or "start:step:stop" (inclusive). "inf" is accepted as a time.
std::vector<double> parse_times(const std::string& text);

/// Initial densities evaluated on a scalar coordinate.
struct DensityPreset {
  std::string kind = "equilibrium";  ///< equilibrium | gamma | gaussian
  double mean = 0.5;
  double variance = 0.01;
};

Vector initial_density(const DensityPreset& preset, const GeneratorModel& model, std::size_t coordinate);

/// Observation functions: linear | abs | shifted-square (h = (x - shift)^2).
struct ObservationPreset {
  std::string kind = "linear";
  double shift = 0.05;
};

std::function<double(double)> observation_function(const ObservationPreset& preset);

/// Potential perturbations: zero | quadratic ((a/2)(x - b/a)^2) | gaussian-well (-amp exp(-(x-c)^2/w)).
struct PerturbationPreset {
  std::string kind = "quadratic";
  double a = -0.1;
  double b = 0.03;
  double amplitude = 0.1;
  double center = 0.5;
  double width = 0.01;
};

Vector perturbation(const PerturbationPreset& preset, const Vector& x);

}  // namespace dmuq::cli
