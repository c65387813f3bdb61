#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "eespt/linalg.hpp"
#include "oracles.hpp"

using namespace eespt;

namespace {

SparseSymmetric from_dense(const oracle::Mat& A) {
  const int n = static_cast<int>(A.size());
  SparseSymmetric S(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j)
      if (A[i][j] != 0.0) S.add(i, j, A[i][j]);
  S.finalize();
  return S;
}

oracle::Mat random_spd(int n, oracle::Rng& rng) {
  oracle::Mat M(n, oracle::Vec(n, 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M[i][j] = rng.normalish();
  oracle::Mat A(n, oracle::Vec(n, 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += M[k][i] * M[k][j];
      A[i][j] = s + (i == j ? double(n) : 0.0);
    }
  return A;
}

}  // namespace

TEST_CASE("solve_spd on identity and diagonal systems is exact") {
  SparseSymmetric I(2);
  I.add(0, 0, 1.0);
  I.add(1, 1, 1.0);
  I.finalize();
  VecX b(2);
  b << 1.0, 2.0;
  VecX x = solve_spd(I, b);
  CHECK(x[0] == 1.0);
  CHECK(x[1] == 2.0);

  SparseSymmetric D(2);
  D.add(0, 0, 2.0);
  D.add(1, 1, 4.0);
  D.finalize();
  VecX b2(2);
  b2 << 2.0, 4.0;
  VecX x2 = solve_spd(D, b2);
  CHECK(x2[0] == 1.0);
  CHECK(x2[1] == 1.0);
}

TEST_CASE("solve_spd matches the dense Cholesky oracle on a random SPD system") {
  oracle::Rng rng(1234);
  oracle::Mat A = random_spd(10, rng);
  oracle::Vec b(10);
  for (auto& v : b) v = rng.normalish();
  oracle::Vec xo = oracle::cholesky_solve(A, b);
  VecX be(10);
  for (int i = 0; i < 10; ++i) be[i] = b[i];
  VecX x = solve_spd(from_dense(A), be);
  for (int i = 0; i < 10; ++i) CHECK(x[i] == doctest::Approx(xo[i]).epsilon(1e-10));
}

TEST_CASE("solve_spd rejects an indefinite matrix") {
  SparseSymmetric A(2);
  A.add(0, 0, 1.0);
  A.add(1, 1, -1.0);
  A.finalize();
  VecX b(2);
  b << 1.0, 1.0;
  CHECK_THROWS_AS(solve_spd(A, b), NotSpdError);
}

TEST_CASE("finalize combines duplicate entries") {
  SparseSymmetric A(2);
  A.add(0, 0, 1.0);
  A.add(0, 0, 1.0);
  A.add(1, 0, 0.5);
  A.add(0, 1, 0.5);  // same lower-triangle slot
  A.finalize();
  CHECK(A.entries().size() == 2);
  CHECK(A.entries()[0].value == 2.0);
  CHECK(A.entries()[1].value == 1.0);
}

TEST_CASE("eliminate_redundant_rows keeps one of two identical rows") {
  ConstraintBlock blk;
  blk.label = "L";
  blk.ncols = 3;
  blk.add_row({{0, 1.0}, {1, 2.0}}, 3.0);
  blk.add_row({{0, 1.0}, {1, 2.0}}, 3.0);
  ConstraintBlock out = eliminate_redundant_rows(blk);
  CHECK(out.num_rows() == 1);
  CHECK(out.rhs[0] == 3.0);
}

TEST_CASE("eliminate_redundant_rows keeps a full-rank block unchanged") {
  ConstraintBlock blk;
  blk.label = "L";
  blk.ncols = 3;
  blk.add_row({{0, 1.0}}, 1.0);
  blk.add_row({{1, 1.0}}, 2.0);
  blk.add_row({{2, 1.0}}, 3.0);
  ConstraintBlock out = eliminate_redundant_rows(blk);
  CHECK(out.num_rows() == 3);
  for (int i = 0; i < 3; ++i) CHECK(out.rhs[i] == blk.rhs[i]);
}

TEST_CASE("eliminate_redundant_rows reduces a rank-2 system and preserves the row space") {
  ConstraintBlock blk;
  blk.label = "L";
  blk.ncols = 4;
  blk.add_row({{0, 1.0}, {1, 1.0}}, 1.0);
  blk.add_row({{2, 1.0}, {3, -1.0}}, 2.0);
  blk.add_row({{0, 2.0}, {1, 2.0}, {2, 3.0}, {3, -3.0}}, 8.0);  // = 2*r0 + 3*r1
  ConstraintBlock out = eliminate_redundant_rows(blk);
  CHECK(out.num_rows() == 2);
  // rank of the union equals rank of the kept rows
  auto densify = [&](const ConstraintBlock& b) {
    oracle::Mat M;
    for (int r = 0; r < b.num_rows(); ++r) {
      oracle::Vec row(b.ncols, 0.0);
      for (const auto& [c, v] : b.rows[r]) row[c] = v;
      M.push_back(row);
    }
    return M;
  };
  oracle::Mat all = densify(blk);
  oracle::Mat kept = densify(out);
  CHECK(oracle::rank(kept) == 2);
  for (const auto& row : all) kept.push_back(row);
  CHECK(oracle::rank(kept) == 2);
}

TEST_CASE("eliminate_redundant_rows flags an inconsistent redundant row") {
  ConstraintBlock blk;
  blk.label = "L";
  blk.ncols = 2;
  blk.add_row({{0, 1.0}, {1, 1.0}}, 1.0);
  blk.add_row({{0, 1.0}, {1, 1.0}}, 2.0);
  CHECK_THROWS_AS(eliminate_redundant_rows(blk), InfeasibleConstraintsError);
}

TEST_CASE("eliminate_redundant_rows is idempotent") {
  oracle::Rng rng(77);
  ConstraintBlock blk;
  blk.label = "L";
  blk.ncols = 6;
  for (int r = 0; r < 4; ++r) {
    std::vector<std::pair<int, double>> row;
    for (int c = 0; c < 6; ++c) row.emplace_back(c, rng.normalish());
    blk.add_row(row, rng.normalish());
  }
  // add dependent rows
  blk.add_row(blk.rows[0], blk.rhs[0]);
  {
    std::vector<std::pair<int, double>> row;
    for (int c = 0; c < 6; ++c) row.emplace_back(c, 2.0 * blk.rows[1][c].second);
    blk.add_row(row, 2.0 * blk.rhs[1]);
  }
  ConstraintBlock once = eliminate_redundant_rows(blk);
  ConstraintBlock twice = eliminate_redundant_rows(once);
  CHECK(once.num_rows() == twice.num_rows());
  for (int r = 0; r < once.num_rows(); ++r) {
    CHECK(once.rows[r] == twice.rows[r]);
    CHECK(once.rhs[r] == twice.rhs[r]);
  }
}

TEST_CASE("solve_saddle: nearest point to a line") {
  SparseSymmetric A(2);
  A.add(0, 0, 1.0);
  A.add(1, 1, 1.0);
  A.finalize();
  VecX B = VecX::Zero(2);
  ConstraintBlock C;
  C.label = "C";
  C.ncols = 2;
  C.add_row({{0, 1.0}, {1, 1.0}}, 2.0);
  SaddleResult r = solve_saddle(A, B, {C});
  CHECK(r.primal[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.primal[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.multipliers.size() == 1);
  CHECK(r.multipliers[0].size() == 1);
}

TEST_CASE("solve_saddle without constraints returns the unconstrained minimum") {
  SparseSymmetric A(2);
  A.add(0, 0, 1.0);
  A.add(1, 1, 2.0);
  A.finalize();
  VecX B(2);
  B << 1.0, 2.0;
  SaddleResult r = solve_saddle(A, B, {});
  CHECK(r.primal[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.primal[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("solve_saddle matches the null-space oracle on random problems") {
  oracle::Rng rng(4321);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 6, m = 2;
    oracle::Mat A = random_spd(n, rng);
    oracle::Vec b(n);
    for (auto& v : b) v = rng.normalish();
    oracle::Mat C(m, oracle::Vec(n, 0.0));
    oracle::Vec d(m);
    for (int i = 0; i < m; ++i) {
      d[i] = rng.normalish();
      for (int j = 0; j < n; ++j) C[i][j] = rng.normalish();
    }
    oracle::Vec xo = oracle::qp_nullspace(A, b, C, d);

    VecX be(n);
    for (int i = 0; i < n; ++i) be[i] = b[i];
    ConstraintBlock blk;
    blk.label = "C";
    blk.ncols = n;
    for (int i = 0; i < m; ++i) {
      std::vector<std::pair<int, double>> row;
      for (int j = 0; j < n; ++j) row.emplace_back(j, C[i][j]);
      blk.add_row(row, d[i]);
    }
    SaddleResult r = solve_saddle(from_dense(A), be, {blk});
    for (int i = 0; i < n; ++i) CHECK(r.primal[i] == doctest::Approx(xo[i]).epsilon(1e-9));
  }
}

TEST_CASE("solve_saddle primal minimizes over the feasible set") {
  oracle::Rng rng(999);
  const int n = 8, m = 3;
  oracle::Mat A = random_spd(n, rng);
  oracle::Vec b(n);
  for (auto& v : b) v = rng.normalish();
  oracle::Mat C(m, oracle::Vec(n, 0.0));
  oracle::Vec d(m);
  for (int i = 0; i < m; ++i) {
    d[i] = rng.normalish();
    for (int j = 0; j < n; ++j) C[i][j] = rng.normalish();
  }
  ConstraintBlock blk;
  blk.label = "C";
  blk.ncols = n;
  for (int i = 0; i < m; ++i) {
    std::vector<std::pair<int, double>> row;
    for (int j = 0; j < n; ++j) row.emplace_back(j, C[i][j]);
    blk.add_row(row, d[i]);
  }
  VecX be(n);
  for (int i = 0; i < n; ++i) be[i] = b[i];
  SparseSymmetric As = from_dense(A);
  SaddleResult r = solve_saddle(As, be, {blk});

  auto objective = [&](const VecX& x) { return 0.5 * x.dot(As.multiply(x)) - x.dot(be); };
  const double at_min = objective(r.primal);
  oracle::Mat Z = oracle::nullspace(C, n);
  for (int rep = 0; rep < 100; ++rep) {
    VecX x = r.primal;
    for (const auto& z : Z) {
      double amp = rng.normalish();
      for (int i = 0; i < n; ++i) x[i] += amp * z[i];
    }
    CHECK(objective(x) >= at_min - 1e-9);
  }
}

TEST_CASE("solve_saddle reports the offending block on rank deficiency") {
  SparseSymmetric A(2);
  A.add(0, 0, 1.0);
  A.add(1, 1, 1.0);
  A.finalize();
  VecX B = VecX::Zero(2);
  ConstraintBlock C1, C2;
  C1.label = "C";
  C1.ncols = 2;
  C1.add_row({{0, 1.0}}, 0.0);
  C2.label = "L";
  C2.ncols = 2;
  C2.add_row({{0, 1.0}}, 0.0);  // duplicates C1's row across blocks
  try {
    solve_saddle(A, B, {C1, C2});
    FAIL("expected RankDeficiencyError");
  } catch (const RankDeficiencyError& e) {
    CHECK(std::string(e.what()).find("L") != std::string::npos);
  }
}
