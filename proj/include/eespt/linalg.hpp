#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "eespt/types.hpp"

namespace eespt {

using VecX = Eigen::VectorXd;

// Sparse symmetric matrix, lower triangle stored as (row, col, value) triples.
class SparseSymmetric {
 public:
  explicit SparseSymmetric(int n = 0) : n_(n) {}

  int size() const { return n_; }
  void add(int row, int col, double value);

  // Sorts and combines duplicate (row, col) pairs.
  void finalize();
  bool finalized() const { return finalized_; }

  struct Entry {
    int row, col;
    double value;
  };
  const std::vector<Entry>& entries() const { return entries_; }

  double trace() const;
  VecX multiply(const VecX& x) const;

 private:
  int n_;
  bool finalized_ = false;
  std::vector<Entry> entries_;
};

// One constraint block of the saddle system: rows * x = rhs.
struct ConstraintBlock {
  std::string label;  // "C", "L", "P", ...
  int ncols = 0;
  std::vector<std::vector<std::pair<int, double>>> rows;  // sparse rows, sorted by column
  VecX rhs;
  std::vector<long long> row_tags;  // optional provenance per row (element ids etc.)

  int num_rows() const { return static_cast<int>(rows.size()); }
  void add_row(const std::vector<std::pair<int, double>>& row, double b, long long tag = -1);
  double dot_row(int r, const VecX& x) const;
};

struct SaddleResult {
  VecX primal;
  std::vector<VecX> multipliers;  // one per block, block order preserved
  bool ridge_used = false;
  double kkt_residual = 0.0;  // relative
};

// Cholesky solve of a symmetric positive definite system.
VecX solve_spd(const SparseSymmetric& A, const VecX& b);

// Drops rows that are linear combinations of earlier-kept rows, to a relative
// pivot threshold. Kept rows are returned verbatim in their original order.
// A discarded row whose rhs is inconsistent raises InfeasibleConstraintsError.
ConstraintBlock eliminate_redundant_rows(const ConstraintBlock& block, double rel_tol = 1e-10);

// Same, but rows of `given` count as already-enforced constraints: returned
// rows are independent of given's row space as well. Needed when another
// block (e.g. Neumann pins) is solved alongside this one.
ConstraintBlock eliminate_redundant_rows(const ConstraintBlock& block, double rel_tol,
                                         const ConstraintBlock& given);

// Minimizes 1/2 x'Ax - x'B subject to every block's rows; A must be positive
// definite on the combined constraint null space. Blocks are expected to be
// pre-reduced to full row rank.
SaddleResult solve_saddle(const SparseSymmetric& A, const VecX& B,
                          const std::vector<ConstraintBlock>& blocks);

}  // namespace eespt
