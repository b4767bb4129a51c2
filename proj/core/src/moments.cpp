#include "dmuq/moments.hpp"

#include "dmuq/error.hpp"

namespace dmuq {

Moments centered_from_raw(double r1, double r2, double r3, double r4) {
  Moments m;
  m.mean = r1;
  const double mu2 = r1 * r1;
  m.m2 = r2 - mu2;
  m.m3 = r3 - 3.0 * r1 * r2 + 2.0 * mu2 * r1;
  m.m4 = r4 - 4.0 * r1 * r3 + 6.0 * mu2 * r2 - 3.0 * mu2 * mu2;
  return m;
}

Moments sample_moments(std::span<const double> values) {
  require(!values.empty(), ErrorCategory::data, "sample_moments: empty input");
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  Moments m;
  m.mean = mean;
  for (double v : values) {
    const double c = v - mean;
    const double c2 = c * c;
    m.m2 += c2;
    m.m3 += c2 * c;
    m.m4 += c2 * c2;
  }
  m.m2 /= n;
  m.m3 /= n;
  m.m4 /= n;
  return m;
}

}  // namespace dmuq
