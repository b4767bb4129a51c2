#include "dmuq/sym_eigs.hpp"

#include "dmuq/error.hpp"

#include <arpack/arpack.h>

#include <Eigen/Eigenvalues>
#include <Eigen/CholmodSupport>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace dmuq {
namespace {

SymEigs dense_top(const SparseMatrix& s, Eigen::Index count) {
  const Matrix dense = Matrix(s);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(dense);
  require(solver.info() == Eigen::Success, ErrorCategory::numeric,
          "dense symmetric eigensolver failed to converge");
  // Eigen returns ascending order; take the top `count` and reverse.
  SymEigs out;
  out.values = solver.eigenvalues().tail(count).reverse();
  out.vectors = solver.eigenvectors().rightCols(count).rowwise().reverse();
  out.route_used = EigenRoute::dense;
  return out;
}

SymEigs sparse_top(const SparseMatrix& s, Eigen::Index count, const SymEigsOptions& opt) {
  const Eigen::Index n = s.rows();
  double diag_scale = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) diag_scale = std::max(diag_scale, std::abs(s.coeff(i, i)));
  require(diag_scale > 0.0, ErrorCategory::numeric, "eigensolver: matrix has zero diagonal");
  const double sigma = 1e-6 * diag_scale;

  using ColSparse = Eigen::SparseMatrix<double, Eigen::ColMajor>;
  ColSparse shifted = -ColSparse(s);
  for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) += sigma;
  shifted.makeCompressed();

  Eigen::CholmodSupernodalLLT<ColSparse, Eigen::Lower> factor(shifted);
  require(factor.info() == Eigen::Success, ErrorCategory::numeric,
          "eigensolver: factorization of shifted operator failed");

  const a_int n_int = static_cast<a_int>(n);
  const a_int nev = static_cast<a_int>(count);
  const a_int ncv = static_cast<a_int>(std::min<Eigen::Index>(n, std::max<Eigen::Index>(2 * count + 1, count + 20)));
  const a_int lworkl = ncv * (ncv + 8);

  std::vector<double> resid(static_cast<std::size_t>(n));
  {
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& r : resid) r = u(rng);
  }
  std::vector<double> v(static_cast<std::size_t>(n) * static_cast<std::size_t>(ncv));
  std::vector<double> workd(3 * static_cast<std::size_t>(n));
  std::vector<double> workl(static_cast<std::size_t>(lworkl));
  a_int iparam[11] = {0};
  a_int ipntr[14] = {0};
  iparam[0] = 1;
  iparam[2] = opt.max_restarts;
  iparam[6] = 1;
  a_int ido = 0;
  a_int info = 1;

  Vector rhs(n);
  while (true) {
    dsaupd_c(&ido, "I", n_int, "LA", nev, opt.tolerance, resid.data(), ncv, v.data(), n_int,
             iparam, ipntr, workd.data(), workl.data(), lworkl, &info);
    if (ido != -1 && ido != 1) break;
    Eigen::Map<const Vector> x(workd.data() + ipntr[0] - 1, n);
    Eigen::Map<Vector> y(workd.data() + ipntr[1] - 1, n);
    rhs = x;
    y = factor.solve(rhs);
  }
  require(info >= 0, ErrorCategory::numeric, "eigensolver: ARPACK dsaupd error code " + std::to_string(info));
  require(info != 1, ErrorCategory::numeric,
          "eigensolver: no convergence after " + std::to_string(opt.max_restarts) + " restarts (" +
              std::to_string(iparam[4]) + " of " + std::to_string(nev) + " converged)");

  std::vector<a_int> select(static_cast<std::size_t>(ncv), 1);
  std::vector<double> d(static_cast<std::size_t>(nev));
  Matrix z(n, nev);
  a_int einfo = 0;
  dseupd_c(1, "A", select.data(), d.data(), z.data(), n_int, 0.0, "I", n_int, "LA", nev, opt.tolerance,
           resid.data(), ncv, v.data(), n_int, iparam, ipntr, workd.data(), workl.data(), lworkl, &einfo);
  require(einfo == 0, ErrorCategory::numeric, "eigensolver: ARPACK dseupd error code " + std::to_string(einfo));

  // Ritz values nu of (sigma I - S)^{-1} map back to lambda = sigma - 1/nu.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(nev));
  for (Eigen::Index i = 0; i < nev; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return d[static_cast<std::size_t>(a)] > d[static_cast<std::size_t>(b)];
  });
  SymEigs out;
  out.values.resize(nev);
  out.vectors.resize(n, nev);
  for (Eigen::Index i = 0; i < nev; ++i) {
    const Eigen::Index src = order[static_cast<std::size_t>(i)];
    out.values(i) = sigma - 1.0 / d[static_cast<std::size_t>(src)];
    out.vectors.col(i) = z.col(src).normalized();
  }
  out.route_used = EigenRoute::sparse;
  return out;
}

}  // namespace

SymEigs top_eigenpairs_nsd(const SparseMatrix& s, Eigen::Index count, const SymEigsOptions& options) {
  require(s.rows() == s.cols(), ErrorCategory::parameter, "eigensolver: matrix must be square");
  require(count >= 1 && count <= s.rows(), ErrorCategory::parameter,
          "eigensolver: requested " + std::to_string(count) + " eigenpairs of a " +
              std::to_string(s.rows()) + "-dimensional operator");
  EigenRoute route = options.route;
  if (route == EigenRoute::automatic)
    route = (s.rows() <= options.dense_threshold || 2 * count + 1 >= s.rows()) ? EigenRoute::dense
                                                                             : EigenRoute::sparse;
  if (route == EigenRoute::sparse && 2 * count + 1 >= s.rows()) route = EigenRoute::dense;
  return route == EigenRoute::dense ? dense_top(s, count) : sparse_top(s, count, options);
}

}  // namespace dmuq
