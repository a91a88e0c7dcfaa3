#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "pdrb/fe/assembly.hpp"
#include "pdrb/fe/fields.hpp"

namespace pdrb::fe {

using linalg::DenseMatrix;

struct Gramians {
  std::array<DenseMatrix, num_regions> grad;  // (∇u_i, ∇u_j)_{Ω_q}
  std::array<DenseMatrix, num_regions> flux;  // (σ_i, σ_j)_{Ω_q}
  DenseMatrix cross;                          // (∇u_i, σ_j)_Ω
};

namespace detail {

inline DenseMatrix stack_primal(const FESpaces& sp, const std::vector<PrimalField>& u) {
  DenseMatrix m(static_cast<Eigen::Index>(sp.num_p1()), static_cast<Eigen::Index>(u.size()));
  for (std::size_t i = 0; i < u.size(); ++i) {
    sp.require_stamp(u[i].stamp, "primal field");
    m.col(static_cast<Eigen::Index>(i)) = u[i].coeffs;
  }
  return m;
}

inline DenseMatrix stack_dual(const FESpaces& sp, const std::vector<DualField>& s) {
  DenseMatrix m(static_cast<Eigen::Index>(sp.num_rt0()), static_cast<Eigen::Index>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i) {
    sp.require_stamp(s[i].stamp, "dual field");
    m.col(static_cast<Eigen::Index>(i)) = s[i].flux;
  }
  return m;
}

/// Xᵀ A X with the upper triangle mirrored, so the result is exactly symmetric.
inline DenseMatrix sym_gram(const SparseMatrix& a, const DenseMatrix& x) {
  const Eigen::Index n = x.cols();
  DenseMatrix ax(x.rows(), n);
  for (Eigen::Index j = 0; j < n; ++j) ax.col(j) = a.multiply(x.col(j));
  DenseMatrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) g(i, j) = g(j, i) = x.col(i).dot(ax.col(j));
  return g;
}

}  // namespace detail

inline Gramians regionwise_gramians(const FESpaces& sp, const Operators& ops, const std::vector<PrimalField>& u,
                                    const std::vector<DualField>& s) {
  const DenseMatrix um = detail::stack_primal(sp, u);
  const DenseMatrix sm = detail::stack_dual(sp, s);
  Gramians g;
  for (std::size_t q = 0; q < num_regions; ++q) {
    g.grad[q] = detail::sym_gram(ops.stiffness[q], um);
    g.flux[q] = detail::sym_gram(ops.mass[q], sm);
  }
  DenseMatrix cs(um.rows(), sm.cols());
  for (Eigen::Index j = 0; j < sm.cols(); ++j) cs.col(j) = ops.cross.multiply(sm.col(j));
  g.cross = um.transpose() * cs;
  return g;
}

inline Gramians regionwise_gramians(const FESpaces& sp, const std::vector<PrimalField>& u,
                                    const std::vector<DualField>& s) {
  return regionwise_gramians(sp, build_operators(sp), u, s);
}

}  // namespace pdrb::fe
