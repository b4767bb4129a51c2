#include "dmuq/geometry.hpp"

#include "dmuq/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace dmuq {

NeighborTable knn(const SampleSet& samples, std::size_t k) {
  const auto n_pts = static_cast<Eigen::Index>(samples.size());
  require(k >= 1, ErrorCategory::parameter, "knn: k must be >= 1");
  require(static_cast<Eigen::Index>(k) < n_pts, ErrorCategory::parameter,
          "knn: k = " + std::to_string(k) + " must be < N = " + std::to_string(n_pts));

  const auto& x = samples.points();
  const auto kk = static_cast<Eigen::Index>(k);
  NeighborTable table;
  table.indices.resize(n_pts, kk);
  table.sq_dists.resize(n_pts, kk);

#pragma omp parallel
  {
    std::vector<std::pair<double, std::int32_t>> cand(static_cast<std::size_t>(n_pts - 1));
#pragma omp for schedule(static)
    for (Eigen::Index i = 0; i < n_pts; ++i) {
      std::size_t c = 0;
      for (Eigen::Index j = 0; j < n_pts; ++j) {
        if (j == i) continue;
        cand[c++] = {(x.row(i) - x.row(j)).squaredNorm(), static_cast<std::int32_t>(j)};
      }
      auto kth = cand.begin() + static_cast<std::ptrdiff_t>(k);
      std::nth_element(cand.begin(), kth - 1, cand.end());
      std::sort(cand.begin(), kth);
      for (Eigen::Index m = 0; m < kk; ++m) {
        table.indices(i, m) = cand[static_cast<std::size_t>(m)].second;
        table.sq_dists(i, m) = cand[static_cast<std::size_t>(m)].first;
      }
    }
  }
  return table;
}

double unit_ball_volume(double d) {
  return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

PilotDensity pilot_density(const NeighborTable& neighbors, std::size_t k, double d0) {
  const std::size_t n_pts = neighbors.size();
  require(k >= 2, ErrorCategory::parameter, "pilot_density: k must be >= 2");
  require(k < n_pts, ErrorCategory::parameter, "pilot_density: k must be < N");
  require(k <= neighbors.k(), ErrorCategory::parameter,
          "pilot_density: neighbour table holds fewer than k neighbours");
  require(d0 > 0.0, ErrorCategory::parameter, "pilot_density: d0 must be positive");

  Vector r(static_cast<Eigen::Index>(n_pts));
  const auto kk = static_cast<Eigen::Index>(k);
  for (Eigen::Index i = 0; i < r.size(); ++i)
    r(i) = std::sqrt(neighbors.sq_dists.row(i).head(kk).mean());

  double r_min = std::numeric_limits<double>::infinity();
  for (double v : r)
    if (v > 0.0) r_min = std::min(r_min, v);
  require(std::isfinite(r_min), ErrorCategory::data, "pilot_density: all points coincide");

  std::size_t clamped = 0;
  for (double& v : r) {
    if (v <= 0.0) {
      v = r_min;
      ++clamped;
    }
  }
  if (clamped > 0)
    warn("pilot_density: " + std::to_string(clamped) +
         " coincident point(s) had zero neighbour radius; clamped to smallest positive radius");

  const double scale = static_cast<double>(k) / (static_cast<double>(n_pts) * unit_ball_volume(d0));
  PilotDensity out;
  out.k = k;
  out.d0 = d0;
  out.q0 = scale * r.array().pow(-d0);
  return out;
}

PilotDensity pilot_density(const SampleSet& samples, std::size_t k, double d0) {
  return pilot_density(knn(samples, k), k, d0);
}

}  // namespace dmuq
