#pragma once

#include "dmuq/dmap.hpp"
#include "dmuq/error.hpp"
#include "dmuq/oracles.hpp"

#include <doctest.h>

#include <string>
#include <vector>

namespace dmuq::test {

inline constexpr std::uint64_t kSeed = 20240601;

/// Equilibrium OU samples at spacing 0.2 (approximately independent draws).
inline SampleSet ou_samples(std::size_t n, std::uint64_t seed = kSeed) {
  SdeSpec spec;
  spec.seed = seed;
  return euler_maruyama(spec, n * 20, 20);
}

/// Fitted OU model with D = 1, shared across test cases of one process.
inline const GeneratorModel& ou_model() {
  static const GeneratorModel model = [] {
    GeneratorModel m = fit_generator(ou_samples(5000));
    m.D = 1.0;
    return m;
  }();
  return model;
}

/// Captures warnings for the lifetime of the object.
struct WarningCapture {
  std::vector<std::string> messages;
  WarningCapture() {
    set_warning_sink([this](std::string_view m) { messages.emplace_back(m); });
  }
  ~WarningCapture() { set_warning_sink([](std::string_view) {}); }
  bool contains(const std::string& needle) const {
    for (const auto& m : messages)
      if (m.find(needle) != std::string::npos) return true;
    return false;
  }
};

template <class F>
ErrorCategory category_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.category();
  }
  FAIL("expected a dmuq::Error");
  return ErrorCategory::parameter;
}

inline double gaussian_pdf(double x, double var = 1.0) {
  return std::exp(-x * x / (2.0 * var)) / std::sqrt(2.0 * 3.14159265358979323846 * var);
}

}  // namespace dmuq::test
