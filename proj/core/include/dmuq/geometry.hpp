#pragma once

#include "dmuq/types.hpp"

#include <cstdint>
#include <span>

namespace dmuq {

/// k nearest *other* points of every sample, ascending by distance.
/// Row i of `indices`/`sq_dists` belongs to sample i.
struct NeighborTable {
  using IndexMatrix = Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  IndexMatrix indices;
  PointMatrix sq_dists;

  std::size_t size() const noexcept { return static_cast<std::size_t>(indices.rows()); }
  std::size_t k() const noexcept { return static_cast<std::size_t>(indices.cols()); }
};

/// Exact Euclidean k-nearest-neighbour search (ties broken by index).
NeighborTable knn(const SampleSet& samples, std::size_t k);

struct PilotDensity {
  Vector q0;
  std::size_t k = 0;
  double d0 = 0.0;
};

/// kNN pilot: q0_j = k / (N V_d0 r_j^d0), r_j^2 the mean of the k nearest
/// squared distances. Only the shape of q0 matters downstream.
PilotDensity pilot_density(const NeighborTable& neighbors, std::size_t k, double d0);
PilotDensity pilot_density(const SampleSet& samples, std::size_t k, double d0);

/// Volume of the unit ball in (possibly fractional) dimension d.
double unit_ball_volume(double d);

}  // namespace dmuq
