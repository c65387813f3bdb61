#include "eespt/linalg.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>

namespace eespt {

void SparseSymmetric::add(int row, int col, double value) {
  if (row < 0 || col < 0 || row >= n_ || col >= n_) throw Error("SparseSymmetric: index out of range");
  if (row < col) std::swap(row, col);
  entries_.push_back({row, col, value});
  finalized_ = false;
}

void SparseSymmetric::finalize() {
  std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
    return std::tie(a.row, a.col) < std::tie(b.row, b.col);
  });
  std::vector<Entry> merged;
  for (const auto& e : entries_) {
    if (!merged.empty() && merged.back().row == e.row && merged.back().col == e.col)
      merged.back().value += e.value;
    else
      merged.push_back(e);
  }
  entries_ = std::move(merged);
  finalized_ = true;
}

double SparseSymmetric::trace() const {
  double t = 0.0;
  for (const auto& e : entries_)
    if (e.row == e.col) t += e.value;
  return t;
}

VecX SparseSymmetric::multiply(const VecX& x) const {
  VecX y = VecX::Zero(n_);
  for (const auto& e : entries_) {
    y[e.row] += e.value * x[e.col];
    if (e.row != e.col) y[e.col] += e.value * x[e.row];
  }
  return y;
}

void ConstraintBlock::add_row(const std::vector<std::pair<int, double>>& row, double b,
                              long long tag) {
  auto sorted = row;
  std::sort(sorted.begin(), sorted.end());
  rows.push_back(std::move(sorted));
  VecX nb(num_rows());
  if (rhs.size() > 0) nb.head(rhs.size()) = rhs;
  nb[num_rows() - 1] = b;
  rhs = std::move(nb);
  row_tags.push_back(tag);
}

double ConstraintBlock::dot_row(int r, const VecX& x) const {
  double s = 0.0;
  for (const auto& [c, v] : rows[r]) s += v * x[c];
  return s;
}

namespace {

Eigen::SparseMatrix<double> to_eigen(const SparseSymmetric& A) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(A.entries().size() * 2);
  for (const auto& e : A.entries()) {
    trip.emplace_back(e.row, e.col, e.value);
    if (e.row != e.col) trip.emplace_back(e.col, e.row, e.value);
  }
  Eigen::SparseMatrix<double> M(A.size(), A.size());
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

}  // namespace

VecX solve_spd(const SparseSymmetric& A, const VecX& b) {
  if (b.size() != A.size()) throw Error("solve_spd: size mismatch");
  Eigen::SparseMatrix<double> M = to_eigen(A);
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(M);
  if (llt.info() != Eigen::Success)
    throw NotSpdError("solve_spd: non-positive pivot encountered, matrix is not SPD");
  VecX x = llt.solve(b);
  // one step of iterative refinement keeps the residual near round-off
  VecX r = b - M * x;
  x += llt.solve(r);
  double rel = (b - M * x).norm() / std::max(1e-300, b.norm());
  if (rel > 1e-10)
    throw NotSpdError("solve_spd: residual " + std::to_string(rel) + " exceeds tolerance");
  return x;
}

namespace {

using SparseRow = std::vector<std::pair<int, double>>;

// y += alpha * x, both sorted by column; drops entries below drop_tol.
SparseRow axpy(const SparseRow& y, double alpha, const SparseRow& x, double drop_tol) {
  SparseRow out;
  out.reserve(y.size() + x.size());
  size_t i = 0, j = 0;
  while (i < y.size() || j < x.size()) {
    if (j >= x.size() || (i < y.size() && y[i].first < x[j].first)) {
      out.push_back(y[i++]);
    } else if (i >= y.size() || x[j].first < y[i].first) {
      double v = alpha * x[j].second;
      if (std::abs(v) > drop_tol) out.emplace_back(x[j].first, v);
      ++j;
    } else {
      double v = y[i].second + alpha * x[j].second;
      if (std::abs(v) > drop_tol) out.emplace_back(y[i].first, v);
      ++i;
      ++j;
    }
  }
  return out;
}

double find(const SparseRow& r, int col) {
  auto it = std::lower_bound(r.begin(), r.end(), col,
                             [](const std::pair<int, double>& a, int c) { return a.first < c; });
  return (it != r.end() && it->first == col) ? it->second : 0.0;
}

double max_abs(const SparseRow& r) {
  double m = 0.0;
  for (const auto& [c, v] : r) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

namespace {

ConstraintBlock eliminate_impl(const ConstraintBlock& block, double rel_tol,
                               const ConstraintBlock* given);

}  // namespace

ConstraintBlock eliminate_redundant_rows(const ConstraintBlock& block, double rel_tol) {
  return eliminate_impl(block, rel_tol, nullptr);
}

ConstraintBlock eliminate_redundant_rows(const ConstraintBlock& block, double rel_tol,
                                         const ConstraintBlock& given) {
  return eliminate_impl(block, rel_tol, &given);
}

namespace {

ConstraintBlock eliminate_impl(const ConstraintBlock& block, double rel_tol,
                               const ConstraintBlock* given) {
  const int nr = block.num_rows();
  if (nr == 0) return block;

  double scale = 0.0;
  for (const auto& r : block.rows) scale = std::max(scale, max_abs(r));
  if (given)
    for (const auto& r : given->rows) scale = std::max(scale, max_abs(r));
  if (scale == 0.0) {
    // all-zero rows: keep none, but zero rhs is required
    for (int i = 0; i < nr; ++i)
      if (std::abs(block.rhs[i]) > 0.0)
        throw InfeasibleConstraintsError("block " + block.label + ": zero row with nonzero rhs");
    ConstraintBlock out;
    out.label = block.label;
    out.ncols = block.ncols;
    out.rhs = VecX(0);
    return out;
  }
  const double drop_tol = rel_tol * scale;
  const double rhs_scale = std::max(block.rhs.size() ? block.rhs.cwiseAbs().maxCoeff() : 0.0, scale);

  std::vector<SparseRow> work = block.rows;
  VecX wrhs = block.rhs;
  std::vector<bool> assigned(nr, false);
  std::vector<int> kept;

  // A given block counts as already enforced: sweep its row space out of the
  // working rows first, so jointly redundant rows are detected.
  if (given && given->num_rows() > 0) {
    std::vector<SparseRow> grows = given->rows;
    VecX grhs = given->rhs;
    for (size_t g = 0; g < grows.size(); ++g) {
      // pivot on the largest remaining entry of this given row
      int pcol = -1;
      double pval = drop_tol;
      for (const auto& [c, v] : grows[g])
        if (std::abs(v) > pval) {
          pval = std::abs(v);
          pcol = c;
        }
      if (pcol < 0) continue;  // given row redundant within its own block
      double pv = find(grows[g], pcol);
      for (size_t h = g + 1; h < grows.size(); ++h) {
        double v = find(grows[h], pcol);
        if (v == 0.0) continue;
        grows[h] = axpy(grows[h], -v / pv, grows[g], 0.0);
        grhs[h] += -v / pv * grhs[g];
      }
      for (int r = 0; r < nr; ++r) {
        double v = find(work[r], pcol);
        if (v == 0.0) continue;
        work[r] = axpy(work[r], -v / pv, grows[g], 0.0);
        wrhs[r] += -v / pv * grhs[g];
      }
    }
  }

  // column -> rows that may hold a nonzero there (kept fresh on fill-in)
  std::vector<std::vector<int>> col_rows(block.ncols);
  for (int r = 0; r < nr; ++r)
    for (const auto& [c, v] : work[r]) col_rows[c].push_back(r);

  for (int col = 0; col < block.ncols; ++col) {
    int pivot = -1;
    double best = drop_tol;
    for (int r : col_rows[col]) {
      if (assigned[r]) continue;
      double v = std::abs(find(work[r], col));
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    if (pivot < 0) continue;
    assigned[pivot] = true;
    kept.push_back(pivot);
    double pv = find(work[pivot], col);
    for (int r : col_rows[col]) {
      if (assigned[r]) continue;
      double v = find(work[r], col);
      if (v == 0.0) continue;
      double alpha = -v / pv;
      work[r] = axpy(work[r], alpha, work[pivot], 0.0);
      wrhs[r] += alpha * wrhs[pivot];
      for (const auto& [c, w] : work[r])
        if (c > col) col_rows[c].push_back(r);  // may duplicate; scan tolerates it
    }
  }

  // whatever is left must be a numerically zero row with consistent rhs
  for (int r = 0; r < nr; ++r) {
    if (assigned[r]) continue;
    if (max_abs(work[r]) > drop_tol)
      throw Error("eliminate_redundant_rows: internal elimination failure");
    if (std::abs(wrhs[r]) > rel_tol * rhs_scale * 1e3) {
      std::string where = (r < static_cast<int>(block.row_tags.size()) && block.row_tags[r] >= 0)
                              ? (" (element " + std::to_string(block.row_tags[r]) + ")")
                              : "";
      throw InfeasibleConstraintsError("block " + block.label + ": redundant row " +
                                       std::to_string(r) + where +
                                       " has inconsistent rhs (residual " +
                                       std::to_string(std::abs(wrhs[r])) + ")");
    }
  }

  std::sort(kept.begin(), kept.end());
  ConstraintBlock out;
  out.label = block.label;
  out.ncols = block.ncols;
  out.rhs = VecX(kept.size());
  for (size_t i = 0; i < kept.size(); ++i) {
    out.rows.push_back(block.rows[kept[i]]);
    out.rhs[i] = block.rhs[kept[i]];
    if (!block.row_tags.empty()) out.row_tags.push_back(block.row_tags[kept[i]]);
  }
  return out;
}

}  // namespace

SaddleResult solve_saddle(const SparseSymmetric& A, const VecX& B,
                          const std::vector<ConstraintBlock>& blocks) {
  const int n = A.size();
  if (B.size() != n) throw Error("solve_saddle: size mismatch");
  int m = 0;
  for (const auto& b : blocks) m += b.num_rows();
  const int total = n + m;

  auto assemble = [&](double ridge) {
    std::vector<Eigen::Triplet<double>> trip;
    for (const auto& e : A.entries()) {
      trip.emplace_back(e.row, e.col, e.value);
      if (e.row != e.col) trip.emplace_back(e.col, e.row, e.value);
    }
    if (ridge > 0.0)
      for (int i = 0; i < n; ++i) trip.emplace_back(i, i, ridge);
    int off = n;
    for (const auto& blk : blocks) {
      for (int r = 0; r < blk.num_rows(); ++r)
        for (const auto& [c, v] : blk.rows[r]) {
          trip.emplace_back(off + r, c, v);
          trip.emplace_back(c, off + r, v);
        }
      off += blk.num_rows();
    }
    Eigen::SparseMatrix<double> K(total, total);
    K.setFromTriplets(trip.begin(), trip.end());
    return K;
  };

  VecX rhs(total);
  rhs.head(n) = B;
  {
    int off = n;
    for (const auto& blk : blocks) {
      rhs.segment(off, blk.num_rows()) = blk.rhs;
      off += blk.num_rows();
    }
  }

  SaddleResult res;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  Eigen::SparseMatrix<double> K = assemble(0.0);
  lu.compute(K);
  if (lu.info() != Eigen::Success) {
    double ridge = (n > 0) ? 1e-12 * A.trace() / n : 0.0;
    if (ridge <= 0.0) ridge = 1e-12;
    K = assemble(ridge);
    lu.compute(K);
    res.ridge_used = true;
    if (lu.info() != Eigen::Success) {
      // attribute the failure to a constraint block when feasible to diagnose
      std::string offender = "unknown";
      if (m <= 1500) {
        ConstraintBlock stacked;
        stacked.label = "stacked";
        stacked.ncols = n;
        int prev_rank = 0;
        for (const auto& blk : blocks) {
          for (int r = 0; r < blk.num_rows(); ++r) stacked.add_row(blk.rows[r], 0.0);
          try {
            int rank = eliminate_redundant_rows(stacked).num_rows();
            if (rank < prev_rank + blk.num_rows()) {
              offender = blk.label;
              break;
            }
            prev_rank = rank;
          } catch (const Error&) {
            offender = blk.label;
            break;
          }
        }
      }
      throw RankDeficiencyError("solve_saddle: singular KKT matrix (offending block: " + offender +
                                ")");
    }
  }

  VecX x = lu.solve(rhs);
  const double scale = std::max({1.0, rhs.cwiseAbs().maxCoeff()});
  double rel = 0.0;
  for (int iter = 0; iter < 4; ++iter) {
    VecX r = rhs - K * x;
    rel = r.cwiseAbs().maxCoeff() / scale;
    if (rel <= 1e-12) break;
    x += lu.solve(r);
  }
  if (rel > 1e-10)
    throw RankDeficiencyError("solve_saddle: KKT residual " + std::to_string(rel) +
                              " exceeds tolerance (near-singular system)");

  res.kkt_residual = rel;
  res.primal = x.head(n);
  int off = n;
  for (const auto& blk : blocks) {
    res.multipliers.push_back(x.segment(off, blk.num_rows()));
    off += blk.num_rows();
  }
  return res;
}

}  // namespace eespt
