#pragma once

#include <span>
#include <vector>

namespace dmuq {

/// Mean and centered moments M2..M4 of a scalar quantity.
struct Moments {
  double mean = 0.0;
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
};

/// Centered moments from raw moments E[x], E[x^2], E[x^3], E[x^4].
Moments centered_from_raw(double r1, double r2, double r3, double r4);

/// Plain sample moments (1/n normalization).
Moments sample_moments(std::span<const double> values);

/// Moments over a time grid.
struct MomentTable {
  std::vector<double> times;
  std::vector<Moments> rows;

  void push_back(double t, const Moments& m) {
    times.push_back(t);
    rows.push_back(m);
  }
  std::size_t size() const noexcept { return times.size(); }
};

}  // namespace dmuq
