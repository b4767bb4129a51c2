#pragma once

#include "dmuq/types.hpp"

#include <Eigen/SparseCore>

#include <cstdint>

namespace dmuq {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class EigenRoute { automatic, dense, sparse };

struct SymEigs {
  Vector values;   ///< descending
  Matrix vectors;  ///< unit-norm columns, matching `values`
  EigenRoute route_used = EigenRoute::automatic;
};

struct SymEigsOptions {
  EigenRoute route = EigenRoute::automatic;
  /// Problems with N at or below this size go to the dense solver under `automatic`.
  Eigen::Index dense_threshold = 1500;
  double tolerance = 1e-12;
  int max_restarts = 500;
  std::uint64_t seed = 0x5eed;
};

/// Largest-algebraic `count` eigenpairs of a symmetric negative-semidefinite
/// sparse matrix. The sparse route runs implicitly-restarted Lanczos
/// (ARPACK) on (sigma I - S)^{-1} with a small positive shift sigma.
SymEigs top_eigenpairs_nsd(const SparseMatrix& s, Eigen::Index count,
                           const SymEigsOptions& options = {});

}  // namespace dmuq
