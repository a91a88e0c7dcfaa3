#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "pdrb/errors.hpp"
#include "pdrb/linalg/sparse_matrix.hpp"

namespace pdrb::linalg {

struct SolveReport {
  std::size_t iterations = 0;
  double final_relative_residual = 0.0;
  std::string method_tag;
};

enum class SpdMethod { pcg, cholesky };
enum class SaddleMethod { automatic, dense, schur_cg, sparse_lu };

struct SolverOptions {
  double spd_tolerance = 1e-12;
  double saddle_tolerance = 1e-10;
  /// 0 means 10·n.
  std::size_t max_iterations = 0;
  SpdMethod spd_method = SpdMethod::pcg;
  SaddleMethod saddle_method = SaddleMethod::automatic;
  /// Systems below this size go to dense elimination under `automatic`.
  std::size_t dense_threshold = 500;
  /// Residual-correction sweeps after a direct factorization.
  int refinement_steps = 2;
};

struct SpdSolution {
  Vector x;
  SolveReport report;
};

struct SaddleSolution {
  Vector x;
  Vector y;
  SolveReport report;
};

namespace detail {

inline std::size_t iteration_cap(const SolverOptions& opts, std::size_t n) {
  return opts.max_iterations > 0 ? opts.max_iterations : 10 * std::max<std::size_t>(n, 1);
}

/// Gaussian elimination with partial pivoting. Returns false when a pivot
/// falls below `pivot_tol`·max|A| (numerically singular).
inline bool dense_eliminate(DenseMatrix a, Vector b, Vector& x, double pivot_tol = 1e-13) {
  const Eigen::Index n = a.rows();
  const double scale = a.cwiseAbs().maxCoeff();
  if (n == 0) {
    x.resize(0);
    return true;
  }
  if (scale == 0.0) return false;
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index p = k;
    double best = std::abs(a(k, k));
    for (Eigen::Index i = k + 1; i < n; ++i) {
      if (std::abs(a(i, k)) > best) {
        best = std::abs(a(i, k));
        p = i;
      }
    }
    if (best <= pivot_tol * scale) return false;
    if (p != k) {
      a.row(k).swap(a.row(p));
      std::swap(b[k], b[p]);
    }
    for (Eigen::Index i = k + 1; i < n; ++i) {
      const double l = a(i, k) / a(k, k);
      if (l == 0.0) continue;
      a.row(i).tail(n - k) -= l * a.row(k).tail(n - k);
      b[i] -= l * b[k];
    }
  }
  x.resize(n);
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (Eigen::Index j = i + 1; j < n; ++j) s -= a(i, j) * x[j];
    x[i] = s / a(i, i);
  }
  return true;
}

}  // namespace detail

/// Jacobi-preconditioned conjugate gradients (or sparse Cholesky) for SPD A.
/// Throws non_convergence when the relative residual target is not reached
/// within the iteration cap.
inline SpdSolution spd_solve(const SparseMatrix& a, const Vector& b, const SolverOptions& opts = {}) {
  PDRB_THROW_IF(a.rows() != a.cols() || static_cast<std::size_t>(b.size()) != a.rows(),
                ErrorCode::invalid_argument, "spd_solve: dimension mismatch");
  const std::size_t n = a.rows();
  SpdSolution out;
  out.x = Vector::Zero(static_cast<Eigen::Index>(n));
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    out.report = {0, 0.0, "zero_rhs"};
    return out;
  }

  if (opts.spd_method == SpdMethod::cholesky) {
    const Eigen::SparseMatrix<double> ae = a.to_eigen();
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(ae);
    PDRB_THROW_IF(llt.info() != Eigen::Success, ErrorCode::non_convergence,
                  "spd_solve: Cholesky factorization failed (matrix not SPD)");
    out.x = llt.solve(b);
    Vector r = b - a.multiply(out.x);
    // b − Ax cannot be evaluated below ~ε‖|A||x|‖; on fine meshes that floor
    // exceeds spd_tolerance·‖b‖, so it is accepted as converged
    const auto floor = [&] {
      return 16.0 * std::numeric_limits<double>::epsilon() * (ae.cwiseAbs() * out.x.cwiseAbs()).norm() / bnorm;
    };
    double target = std::max(opts.spd_tolerance, floor());
    for (int s = 0; s < opts.refinement_steps && r.norm() > target * bnorm; ++s) {
      out.x += llt.solve(r);
      r = b - a.multiply(out.x);
      target = std::max(opts.spd_tolerance, floor());
    }
    out.report = {1, r.norm() / bnorm, "cholesky"};
    PDRB_THROW_IF(out.report.final_relative_residual > target, ErrorCode::non_convergence,
                  "spd_solve: Cholesky residual " + std::to_string(out.report.final_relative_residual) +
                      " above tolerance " + std::to_string(target));
    return out;
  }

  Vector diag = a.diagonal();
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    PDRB_THROW_IF(!(diag[i] > 0.0), ErrorCode::invalid_argument,
                  "spd_solve: non-positive diagonal entry at " + std::to_string(i));
  }
  const Vector inv_diag = diag.cwiseInverse();
  const std::size_t cap = detail::iteration_cap(opts, n);

  Vector x = Vector::Zero(static_cast<Eigen::Index>(n));
  Vector r = b;
  Vector z = inv_diag.cwiseProduct(r);
  Vector p = z;
  double rz = r.dot(z);
  std::size_t it = 0;
  double rel = 1.0;
  while (it < cap) {
    const Vector ap = a.multiply(p);
    const double pap = p.dot(ap);
    PDRB_THROW_IF(!(pap > 0.0), ErrorCode::non_convergence, "spd_solve: matrix not positive definite");
    const double step = rz / pap;
    x += step * p;
    r -= step * ap;
    ++it;
    // Recompute the true residual periodically to avoid drift in the recurrence.
    if (it % 50 == 0) r = b - a.multiply(x);
    rel = r.norm() / bnorm;
    if (rel <= opts.spd_tolerance) {
      rel = (b - a.multiply(x)).norm() / bnorm;
      if (rel <= opts.spd_tolerance) break;
      r = b - a.multiply(x);
    }
    z = inv_diag.cwiseProduct(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  PDRB_THROW_IF(rel > opts.spd_tolerance, ErrorCode::non_convergence,
                "spd_solve: PCG reached " + std::to_string(it) + " iterations with relative residual " +
                    std::to_string(rel));
  out.x = std::move(x);
  out.report = {it, rel, "pcg_jacobi"};
  return out;
}

namespace detail {

inline double block_residual(const SparseMatrix& m, const SparseMatrix& b, const Vector& f, const Vector& g,
                             const Vector& x, const Vector& y) {
  const Vector r1 = f - m.multiply(x) - b.multiply_transpose(y);
  const Vector r2 = g - b.multiply(x);
  return std::sqrt(r1.squaredNorm() + r2.squaredNorm());
}

inline SparseMatrix saddle_block(const SparseMatrix& m, const SparseMatrix& b) {
  const std::size_t n = m.rows();
  const std::size_t k = b.rows();
  std::vector<Triplet> t = m.triplets();
  for (const auto& e : b.triplets()) {
    t.push_back({n + e.row, e.col, e.value});
    t.push_back({e.col, n + e.row, e.value});
  }
  return SparseMatrix::from_triplets(n + k, n + k, std::move(t));
}

inline SaddleSolution split(const Vector& z, std::size_t n, std::size_t k) {
  SaddleSolution s;
  s.x = z.head(static_cast<Eigen::Index>(n));
  s.y = z.segment(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  return s;
}

}  // namespace detail

/// Solves [[M, Bᵀ],[B, 0]]·(x, y) = (f, g) with M SPD.
///
/// Rank deficiency of B (discrete inf-sup failure) throws rank_deficient;
/// an iterative method running out of iterations throws non_convergence.
inline SaddleSolution saddle_solve(const SparseMatrix& m, const SparseMatrix& b, const Vector& f,
                                   const Vector& g, const SolverOptions& opts = {}) {
  const std::size_t n = m.rows();
  const std::size_t k = b.rows();
  PDRB_THROW_IF(m.cols() != n || b.cols() != n || static_cast<std::size_t>(f.size()) != n ||
                    static_cast<std::size_t>(g.size()) != k,
                ErrorCode::invalid_argument, "saddle_solve: dimension mismatch");
  PDRB_THROW_IF(k > n, ErrorCode::rank_deficient, "saddle_solve: more constraints than unknowns");
  for (std::size_t r = 0; r < k; ++r) {
    PDRB_THROW_IF(b.row_ptr()[r] == b.row_ptr()[r + 1], ErrorCode::rank_deficient,
                  "saddle_solve: empty constraint row " + std::to_string(r));
  }

  const double rhs_norm = std::sqrt(f.squaredNorm() + g.squaredNorm());
  if (rhs_norm == 0.0) {
    SaddleSolution s{Vector::Zero(static_cast<Eigen::Index>(n)), Vector::Zero(static_cast<Eigen::Index>(k)),
                     {0, 0.0, "zero_rhs"}};
    return s;
  }

  SaddleMethod method = opts.saddle_method;
  if (method == SaddleMethod::automatic)
    method = (n + k < opts.dense_threshold) ? SaddleMethod::dense : SaddleMethod::sparse_lu;

  Vector rhs(static_cast<Eigen::Index>(n + k));
  rhs << f, g;

  if (method == SaddleMethod::dense) {
    const DenseMatrix a = detail::saddle_block(m, b).to_dense();
    Vector z;
    PDRB_THROW_IF(!detail::dense_eliminate(a, rhs, z), ErrorCode::rank_deficient,
                  "saddle_solve: singular block system (constraint rank deficiency)");
    for (int s = 0; s < opts.refinement_steps; ++s) {
      const Vector r = rhs - a * z;
      if (r.norm() <= 1e-3 * opts.saddle_tolerance * rhs_norm) break;
      Vector dz;
      if (!detail::dense_eliminate(a, r, dz)) break;
      z += dz;
    }
    SaddleSolution s = detail::split(z, n, k);
    s.report = {1, detail::block_residual(m, b, f, g, s.x, s.y) / rhs_norm, "dense_lu"};
    PDRB_THROW_IF(s.report.final_relative_residual > opts.saddle_tolerance, ErrorCode::rank_deficient,
                  "saddle_solve: dense residual above tolerance (ill-posed system)");
    return s;
  }

  if (method == SaddleMethod::sparse_lu) {
    const SparseMatrix a = detail::saddle_block(m, b);
    Eigen::SparseMatrix<double> ae = a.to_eigen();
    ae.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(ae);
    lu.factorize(ae);
    PDRB_THROW_IF(lu.info() != Eigen::Success, ErrorCode::rank_deficient,
                  "saddle_solve: sparse LU failed (constraint rank deficiency)");
    Vector z = lu.solve(rhs);
    Vector r = rhs - a.multiply(z);
    for (int s = 0; s < opts.refinement_steps; ++s) {
      if (r.norm() <= 1e-3 * opts.saddle_tolerance * rhs_norm) break;
      z += lu.solve(r);
      r = rhs - a.multiply(z);
    }
    SaddleSolution s = detail::split(z, n, k);
    s.report = {1, r.norm() / rhs_norm, "sparse_lu"};
    PDRB_THROW_IF(!std::isfinite(s.report.final_relative_residual) ||
                      s.report.final_relative_residual > opts.saddle_tolerance,
                  ErrorCode::rank_deficient, "saddle_solve: sparse LU residual above tolerance (ill-posed system)");
    return s;
  }

  // Schur complement: S y = B M⁻¹ f − g, x = M⁻¹ (f − Bᵀ y), outer CG on S.
  const Eigen::SparseMatrix<double> me = m.to_eigen();
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> mllt(me);
  PDRB_THROW_IF(mllt.info() != Eigen::Success, ErrorCode::invalid_argument,
                "saddle_solve: M block not SPD");
  auto apply_minv = [&](const Vector& v) { return Vector(mllt.solve(v)); };
  auto apply_s = [&](const Vector& v) { return b.multiply(apply_minv(b.multiply_transpose(v))); };

  const Vector minv_f = apply_minv(f);
  const Vector schur_rhs = b.multiply(minv_f) - g;
  Vector y = Vector::Zero(static_cast<Eigen::Index>(k));
  std::size_t it = 0;
  const std::size_t cap = detail::iteration_cap(opts, k);
  const double srhs_norm = schur_rhs.norm();
  if (srhs_norm > 0.0) {
    Vector r = schur_rhs;
    Vector p = r;
    double rr = r.squaredNorm();
    // The Schur system is solved to a tighter target than the block tolerance.
    const double target = 1e-2 * opts.saddle_tolerance * srhs_norm;
    double max_rayleigh = 0.0;
    while (it < cap && std::sqrt(rr) > target) {
      const Vector sp = apply_s(p);
      const double psp = p.dot(sp);
      const double rayleigh = psp / p.squaredNorm();
      max_rayleigh = std::max(max_rayleigh, rayleigh);
      PDRB_THROW_IF(!(rayleigh > 1e-13 * max_rayleigh), ErrorCode::rank_deficient,
                    "saddle_solve: Schur complement singular (inf-sup failure)");
      const double step = rr / psp;
      y += step * p;
      r -= step * sp;
      ++it;
      const double rr_next = r.squaredNorm();
      p = r + (rr_next / rr) * p;
      rr = rr_next;
    }
  }
  Vector x = apply_minv(f - b.multiply_transpose(y));
  SaddleSolution s{std::move(x), std::move(y), {}};
  const double rel = detail::block_residual(m, b, f, g, s.x, s.y) / rhs_norm;
  s.report = {it, rel, "schur_cg"};
  PDRB_THROW_IF(rel > opts.saddle_tolerance, ErrorCode::non_convergence,
                "saddle_solve: Schur CG stopped at " + std::to_string(it) + " iterations, residual " +
                    std::to_string(rel));
  return s;
}

}  // namespace pdrb::linalg
