#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "pdrb/errors.hpp"

namespace pdrb::linalg {

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Compressed-row matrix. Immutable once built: every mutating operation
/// returns a new matrix, so instances can be shared across concurrent solves.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

  /// Duplicates are summed. Entries are stored rows ascending, columns
  /// ascending; duplicates are added in ascending value order so the result
  /// does not depend on the order of `triplets`.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                    std::vector<Triplet> triplets) {
    for (const auto& t : triplets) {
      PDRB_THROW_IF(t.row >= rows || t.col >= cols, ErrorCode::index_out_of_range,
                    "triplet (" + std::to_string(t.row) + "," + std::to_string(t.col) +
                        ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
      return std::tie(a.row, a.col, a.value) < std::tie(b.row, b.col, b.value);
    });
    SparseMatrix m(rows, cols);
    m.col_idx_.reserve(triplets.size());
    m.values_.reserve(triplets.size());
    std::size_t k = 0;
    while (k < triplets.size()) {
      const std::size_t r = triplets[k].row;
      const std::size_t c = triplets[k].col;
      double sum = 0.0;
      while (k < triplets.size() && triplets[k].row == r && triplets[k].col == c) {
        sum += triplets[k].value;
        ++k;
      }
      m.col_idx_.push_back(c);
      m.values_.push_back(sum);
      ++m.row_ptr_[r + 1];
    }
    for (std::size_t r = 0; r < rows; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
    return m;
  }

  static SparseMatrix identity(std::size_t n) {
    std::vector<Triplet> t;
    t.reserve(n);
    for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
    return from_triplets(n, n, std::move(t));
  }

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
  [[nodiscard]] std::size_t nnz() const noexcept { return values_.size(); }
  [[nodiscard]] std::span<const std::size_t> row_ptr() const noexcept { return row_ptr_; }
  [[nodiscard]] std::span<const std::size_t> col_idx() const noexcept { return col_idx_; }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

  [[nodiscard]] double coeff(std::size_t i, std::size_t j) const {
    PDRB_THROW_IF(i >= rows_ || j >= cols_, ErrorCode::index_out_of_range, "coeff index");
    const auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
    const auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
    const auto it = std::lower_bound(first, last, j);
    if (it == last || *it != j) return 0.0;
    return values_[static_cast<std::size_t>(it - col_idx_.begin())];
  }

  [[nodiscard]] Vector multiply(const Vector& x) const {
    PDRB_THROW_IF(static_cast<std::size_t>(x.size()) != cols_, ErrorCode::invalid_argument,
                  "multiply: dimension mismatch");
    Vector y(static_cast<Eigen::Index>(rows_));
    for (std::size_t r = 0; r < rows_; ++r) {
      double s = 0.0;
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
        s += values_[k] * x[static_cast<Eigen::Index>(col_idx_[k])];
      y[static_cast<Eigen::Index>(r)] = s;
    }
    return y;
  }

  [[nodiscard]] Vector multiply_transpose(const Vector& x) const {
    PDRB_THROW_IF(static_cast<std::size_t>(x.size()) != rows_, ErrorCode::invalid_argument,
                  "multiply_transpose: dimension mismatch");
    Vector y = Vector::Zero(static_cast<Eigen::Index>(cols_));
    for (std::size_t r = 0; r < rows_; ++r) {
      const double xr = x[static_cast<Eigen::Index>(r)];
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
        y[static_cast<Eigen::Index>(col_idx_[k])] += values_[k] * xr;
    }
    return y;
  }

  [[nodiscard]] Vector diagonal() const {
    Vector d = Vector::Zero(static_cast<Eigen::Index>(std::min(rows_, cols_)));
    for (std::size_t r = 0; r < static_cast<std::size_t>(d.size()); ++r) d[static_cast<Eigen::Index>(r)] = coeff(r, r);
    return d;
  }

  [[nodiscard]] std::vector<Triplet> triplets() const {
    std::vector<Triplet> out;
    out.reserve(nnz());
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) out.push_back({r, col_idx_[k], values_[k]});
    return out;
  }

  [[nodiscard]] SparseMatrix transpose() const {
    std::vector<Triplet> t;
    t.reserve(nnz());
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) t.push_back({col_idx_[k], r, values_[k]});
    return from_triplets(cols_, rows_, std::move(t));
  }

  /// Exact symmetry of stored pairs (no tolerance).
  [[nodiscard]] bool is_symmetric() const {
    if (rows_ != cols_) return false;
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
        if (coeff(col_idx_[k], r) != values_[k]) return false;
    return true;
  }

  /// Rows `row_ids` and columns `col_ids` (in the given order).
  [[nodiscard]] SparseMatrix submatrix(std::span<const std::size_t> row_ids,
                                       std::span<const std::size_t> col_ids) const {
    constexpr std::size_t absent = static_cast<std::size_t>(-1);
    std::vector<std::size_t> col_map(cols_, absent);
    for (std::size_t j = 0; j < col_ids.size(); ++j) col_map[col_ids[j]] = j;
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < row_ids.size(); ++i) {
      const std::size_t r = row_ids[i];
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
        if (col_map[col_idx_[k]] != absent) t.push_back({i, col_map[col_idx_[k]], values_[k]});
    }
    return from_triplets(row_ids.size(), col_ids.size(), std::move(t));
  }

  [[nodiscard]] Eigen::SparseMatrix<double> to_eigen() const {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(nnz());
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
        t.emplace_back(static_cast<int>(r), static_cast<int>(col_idx_[k]), values_[k]);
    Eigen::SparseMatrix<double> m(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_));
    m.setFromTriplets(t.begin(), t.end());
    return m;
  }

  [[nodiscard]] DenseMatrix to_dense() const {
    DenseMatrix d = DenseMatrix::Zero(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_));
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
        d(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col_idx_[k])) += values_[k];
    return d;
  }

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_idx_;
  std::vector<double> values_;
};

inline SparseMatrix assemble_from_triplets(std::size_t rows, std::size_t cols,
                                           std::vector<Triplet> triplets) {
  return SparseMatrix::from_triplets(rows, cols, std::move(triplets));
}

/// Σ_k weight_k · matrix_k, all of the same shape.
inline SparseMatrix linear_combination(std::span<const double> weights,
                                       std::span<const SparseMatrix* const> matrices) {
  PDRB_THROW_IF(weights.size() != matrices.size() || matrices.empty(), ErrorCode::invalid_argument,
                "linear_combination: need matching non-empty weights/matrices");
  const std::size_t rows = matrices.front()->rows();
  const std::size_t cols = matrices.front()->cols();
  std::vector<Triplet> t;
  for (std::size_t k = 0; k < matrices.size(); ++k) {
    const auto& m = *matrices[k];
    PDRB_THROW_IF(m.rows() != rows || m.cols() != cols, ErrorCode::invalid_argument,
                  "linear_combination: shape mismatch");
    const auto rp = m.row_ptr();
    const auto ci = m.col_idx();
    const auto v = m.values();
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t i = rp[r]; i < rp[r + 1]; ++i) t.push_back({r, ci[i], weights[k] * v[i]});
  }
  return SparseMatrix::from_triplets(rows, cols, std::move(t));
}

}  // namespace pdrb::linalg
