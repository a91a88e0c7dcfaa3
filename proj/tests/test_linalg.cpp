#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "pdrb/linalg/solvers.hpp"
#include "support.hpp"

using namespace pdrb;
using namespace pdrb::linalg;

namespace {

SparseMatrix from_dense(const oracle::Dense& a) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j)
      if (a[i][j] != 0.0) t.push_back({i, j, a[i][j]});
  return assemble_from_triplets(a.size(), a.empty() ? 0 : a[0].size(), t);
}

Vector to_vec(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())); }

double rel_residual(const SparseMatrix& a, const Vector& x, const Vector& b) {
  return (a.multiply(x) - b).norm() / b.norm();
}

}  // namespace

TEST(Assembly, DuplicatesSummed) {
  auto m = assemble_from_triplets(1, 1, {{0, 0, 1.0}, {0, 0, 1.0}});
  EXPECT_EQ(m.nnz(), 1u);
  EXPECT_EQ(m.coeff(0, 0), 2.0);
}

TEST(Assembly, EmptyIsZero) {
  auto m = assemble_from_triplets(3, 3, {});
  EXPECT_EQ(m.rows(), 3u);
  EXPECT_EQ(m.nnz(), 0u);
  EXPECT_EQ(m.to_dense(), DenseMatrix::Zero(3, 3));
}

TEST(Assembly, OutOfRangeThrows) {
  try {
    (void)assemble_from_triplets(2, 2, {{2, 0, 1.0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::index_out_of_range);
  }
}

TEST(Assembly, UnitTriangleStiffnessRowsSumToZero) {
  // gradients of the hat functions on (0,0),(1,0),(0,1), area 1/2
  const double g[3][2] = {{-1, -1}, {1, 0}, {0, 1}};
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) t.push_back({i, j, 0.5 * (g[i][0] * g[j][0] + g[i][1] * g[j][1])});
  auto m = assemble_from_triplets(3, 3, t);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(m.coeff(i, 0) + m.coeff(i, 1) + m.coeff(i, 2), 0.0);
  EXPECT_TRUE(m.is_symmetric());
}

TEST(AssemblyProperty, OrderIndependent) {
  oracle::Gen gen(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Triplet> t;
    const std::size_t n = 1 + gen.index(15);
    for (int k = 0; k < 200; ++k) t.push_back({gen.index(n), gen.index(n), gen.uniform(-1, 1)});
    auto a = assemble_from_triplets(n, n, t);
    std::shuffle(t.begin(), t.end(), gen.engine());
    auto b = assemble_from_triplets(n, n, t);
    EXPECT_TRUE(a == b);
    // column indices ascending within each row
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t k = a.row_ptr()[r] + 1; k < a.row_ptr()[r + 1]; ++k)
        EXPECT_LT(a.col_idx()[k - 1], a.col_idx()[k]);
  }
}

TEST(SpdSolve, Identity) {
  auto r = spd_solve(SparseMatrix::identity(3), Vector{{1.0, 2.0, 3.0}});
  EXPECT_NEAR((r.x - Vector{{1.0, 2.0, 3.0}}).norm(), 0.0, 1e-15);
}

TEST(SpdSolve, Diagonal) {
  auto a = assemble_from_triplets(2, 2, {{0, 0, 2.0}, {1, 1, 4.0}});
  auto r = spd_solve(a, Vector{{2.0, 4.0}});
  EXPECT_NEAR(r.x[0], 1.0, 1e-15);
  EXPECT_NEAR(r.x[1], 1.0, 1e-15);
}

TEST(SpdSolve, ZeroRhs) {
  auto r = spd_solve(SparseMatrix::identity(4), Vector::Zero(4));
  EXPECT_EQ(r.x, Vector::Zero(4));
  EXPECT_EQ(r.report.iterations, 0u);
}

TEST(SpdSolve, NonConvergenceReported) {
  oracle::Gen gen(3);
  auto a = from_dense(gen.spd(30));
  SolverOptions o;
  o.max_iterations = 2;
  try {
    (void)spd_solve(a, Vector::Ones(30), o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::non_convergence);
  }
}

// tridiag(−1, 2, −1)·x = 1 has x_i = i(n+1−i)/2 (1-based). With n = 20000 the
// residual of the exact solution cannot be evaluated to 1e-12 relative.
TEST(SpdSolve, CholeskyAcceptsRoundingFloor) {
  const std::size_t n = 20000;
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < n; ++i) {
    t.push_back({i, i, 2.0});
    if (i > 0) t.push_back({i, i - 1, -1.0});
    if (i + 1 < n) t.push_back({i, i + 1, -1.0});
  }
  const auto a = assemble_from_triplets(n, n, t);
  SolverOptions o;
  o.spd_method = SpdMethod::cholesky;
  const auto r = spd_solve(a, Vector::Ones(static_cast<Eigen::Index>(n)), o);
  double worst = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double k = static_cast<double>(i + 1);
    const double exact = k * (static_cast<double>(n) + 1 - k) / 2;
    worst = std::max(worst, std::abs(r.x[static_cast<Eigen::Index>(i)] - exact) / exact);
  }
  EXPECT_LE(worst, 1e-7);
  EXPECT_GT(r.report.final_relative_residual, 0.0);
}

TEST(SpdSolveProperty, RandomSpdMatchesDenseOracle) {
  oracle::Gen gen(20240611);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = trial == 0 ? 20 : 2 + gen.index(40);
    const auto ad = gen.spd(n);
    std::vector<double> b(n);
    for (auto& v : b) v = gen.uniform(-5, 5);
    const auto xo = oracle::solve_dense(ad, b);
    const auto a = from_dense(ad);
    for (auto method : {SpdMethod::pcg, SpdMethod::cholesky}) {
      SolverOptions o;
      o.spd_method = method;
      auto r = spd_solve(a, to_vec(b), o);
      EXPECT_LE(rel_residual(a, r.x, to_vec(b)), 1e-12);
      EXPECT_LE(r.report.final_relative_residual, 1e-12);
      EXPECT_LE((r.x - to_vec(xo)).norm(), 1e-10 * to_vec(xo).norm());
    }
  }
}

TEST(SpdSolveProperty, Deterministic) {
  oracle::Gen gen(5);
  const auto a = from_dense(gen.spd(25));
  Vector b = Vector::LinSpaced(25, -1, 1);
  EXPECT_EQ(spd_solve(a, b).x, spd_solve(a, b).x);
}

TEST(SaddleSolve, HandSolvable) {
  auto m = SparseMatrix::identity(2);
  auto b = assemble_from_triplets(1, 2, {{0, 0, 1.0}});
  auto r = saddle_solve(m, b, Vector::Zero(2), Vector{{1.0}});
  EXPECT_NEAR(r.x[0], 1.0, 1e-14);
  EXPECT_NEAR(r.x[1], 0.0, 1e-14);
  // x1 + y = 0 from the first block row
  EXPECT_NEAR(r.y[0], -1.0, 1e-14);
}

TEST(SaddleSolve, ZeroData) {
  auto m = SparseMatrix::identity(3);
  auto b = assemble_from_triplets(1, 3, {{0, 0, 1.0}, {0, 2, 1.0}});
  auto r = saddle_solve(m, b, Vector::Zero(3), Vector::Zero(1));
  EXPECT_EQ(r.x, Vector::Zero(3));
  EXPECT_EQ(r.y, Vector::Zero(1));
}

TEST(SaddleSolve, RankDeficiencyIsDistinct) {
  auto m = SparseMatrix::identity(3);
  // two identical constraint rows
  auto b = assemble_from_triplets(2, 3, {{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}});
  for (auto method : {SaddleMethod::dense, SaddleMethod::sparse_lu, SaddleMethod::schur_cg}) {
    SolverOptions o;
    o.saddle_method = method;
    try {
      (void)saddle_solve(m, b, Vector::Ones(3), Vector{{1.0, 2.0}}, o);
      ADD_FAILURE() << "no error for method " << static_cast<int>(method);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::rank_deficient);
    }
  }
}

TEST(SaddleSolveProperty, RandomSystemsMatchDenseOracle) {
  oracle::Gen gen(77);
  for (int trial = 0; trial < 15; ++trial) {
    const std::size_t n = 4 + gen.index(120);
    const std::size_t k = 1 + gen.index(n / 2);
    const auto md = gen.spd(n, 0.2);
    oracle::Dense bd(k, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < k; ++i) {
      bd[i][i] = 1.0 + gen.uniform(0, 1);  // full row rank
      for (std::size_t j = 0; j < n; ++j)
        if (gen.uniform(0, 1) < 0.1) bd[i][j] += gen.uniform(-1, 1);
    }
    std::vector<double> rhs(n + k);
    for (auto& v : rhs) v = gen.uniform(-1, 1);
    oracle::Dense big(n + k, std::vector<double>(n + k, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) big[i][j] = md[i][j];
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < n; ++j) big[n + i][j] = big[j][n + i] = bd[i][j];
    const auto zo = oracle::solve_dense(big, rhs);
    const Vector z = to_vec(zo);
    const Vector f = to_vec(rhs).head(static_cast<Eigen::Index>(n));
    const Vector g = to_vec(rhs).tail(static_cast<Eigen::Index>(k));
    const auto m = from_dense(md);
    const auto b = from_dense(bd);
    for (auto method : {SaddleMethod::automatic, SaddleMethod::dense, SaddleMethod::sparse_lu, SaddleMethod::schur_cg}) {
      SolverOptions o;
      o.saddle_method = method;
      auto r = saddle_solve(m, b, f, g, o);
      Vector sol(static_cast<Eigen::Index>(n + k));
      sol << r.x, r.y;
      EXPECT_LE((sol - z).norm(), 1e-9 * z.norm()) << "method " << static_cast<int>(method);
      const double scale = std::sqrt(f.squaredNorm() + g.squaredNorm());
      EXPECT_LE((m.multiply(r.x) + b.multiply_transpose(r.y) - f).norm(), 1e-10 * scale);
      EXPECT_LE((b.multiply(r.x) - g).norm(), 1e-10 * scale);
    }
  }
}

TEST(SparseMatrixOps, LinearCombinationAndTranspose) {
  auto a = assemble_from_triplets(2, 2, {{0, 0, 1.0}, {0, 1, 2.0}});
  auto b = assemble_from_triplets(2, 2, {{1, 0, 3.0}, {0, 1, 1.0}});
  const double w[] = {2.0, -1.0};
  const SparseMatrix* ms[] = {&a, &b};
  auto c = linear_combination(w, ms);
  EXPECT_EQ(c.coeff(0, 0), 2.0);
  EXPECT_EQ(c.coeff(0, 1), 3.0);
  EXPECT_EQ(c.coeff(1, 0), -3.0);
  EXPECT_EQ(a.transpose().coeff(1, 0), 2.0);
  const std::size_t rows[] = {0};
  const std::size_t cols[] = {1, 0};
  auto s = a.submatrix(rows, cols);
  EXPECT_EQ(s.to_dense(), (DenseMatrix(1, 2) << 2.0, 1.0).finished());
}
