#include "cellkit/dae/linalg.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <cmath>
#include <numeric>
#include <sstream>

#include <spdlog/spdlog.h>

#include "cellkit/errors.hpp"
#include "cellkit/simd/kernels.hpp"

namespace cellkit::dae {

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols, const Triplets& t) {
  SparseMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  const std::size_t k = t.size();
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return t.row[a] != t.row[b] ? t.row[a] < t.row[b] : t.col[a] < t.col[b];
  });
  m.row_ptr_.assign(rows + 1, 0);
  m.scatter_.assign(k, -1);
  int last_r = -1, last_c = -1;
  for (std::size_t q : idx) {
    const int r = t.row[q], c = t.col[q];
    if (r < 0 || c < 0 || static_cast<std::size_t>(r) >= rows || static_cast<std::size_t>(c) >= cols)
      throw Error("sparse matrix entry out of range");
    if (r != last_r || c != last_c) {
      m.col_idx_.push_back(c);
      m.values_.push_back(0.0);
      ++m.row_ptr_[r + 1];
      last_r = r;
      last_c = c;
    }
    const int slot = static_cast<int>(m.values_.size()) - 1;
    m.scatter_[q] = slot;
    m.values_[slot] += t.val[q];
  }
  for (std::size_t r = 0; r < rows; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
  return m;
}

void SparseMatrix::refill(const Triplets& t) {
  if (t.size() != scatter_.size()) throw Error("sparse refill: triplet sequence does not match pattern");
  std::fill(values_.begin(), values_.end(), 0.0);
  for (std::size_t q = 0; q < t.size(); ++q) values_[scatter_[q]] += t.val[q];
}

bool SparseMatrix::in_pattern(int r, int c) const {
  const auto b = col_idx_.begin() + row_ptr_[r], e = col_idx_.begin() + row_ptr_[r + 1];
  return std::binary_search(b, e, c);
}

double SparseMatrix::coeff(int r, int c) const {
  const auto b = col_idx_.begin() + row_ptr_[r], e = col_idx_.begin() + row_ptr_[r + 1];
  const auto it = std::lower_bound(b, e, c);
  if (it == e || *it != c) return 0.0;
  return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

Mat SparseMatrix::to_dense() const {
  Mat d = Mat::Zero(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_));
  for (std::size_t r = 0; r < rows_; ++r)
    for (int q = row_ptr_[r]; q < row_ptr_[r + 1]; ++q) d(static_cast<Eigen::Index>(r), col_idx_[q]) += values_[q];
  return d;
}

Vec SparseMatrix::multiply(const Vec& x) const {
  Vec y = Vec::Zero(static_cast<Eigen::Index>(rows_));
  for (std::size_t r = 0; r < rows_; ++r) {
    double s = 0.0;
    for (int q = row_ptr_[r]; q < row_ptr_[r + 1]; ++q) s += values_[q] * x[col_idx_[q]];
    y[static_cast<Eigen::Index>(r)] = s;
  }
  return y;
}

BandLU::BandLU(std::size_t n, std::size_t kl, std::size_t ku)
    : n_(n), kl_(kl), ku_(ku), width_(2 * kl + ku + 1), a_(n * (2 * kl + ku + 1), 0.0), piv_(n, 0) {}

void BandLU::set_zero() { std::fill(a_.begin(), a_.end(), 0.0); }

namespace {

void warn_condition(double estimate) {
  static std::atomic<int> emitted{0};
  if (emitted.fetch_add(1) < 5)
    spdlog::warn("banded factorization: estimated condition {:.3e} exceeds {:.0e}", estimate, kConditionWarning);
}

}  // namespace

void BandLU::factor(double rel_pivot_tol) {
  double amax = 0.0;
  for (double v : a_) amax = std::max(amax, std::abs(v));
  const double tiny = rel_pivot_tol * amax;
  const auto& axpy = simd::active().axpy;
  double umax = 0.0, umin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n_; ++k) {
    const std::size_t rlast = std::min(n_ - 1, k + kl_);
    const std::size_t clast = std::min(n_ - 1, k + kl_ + ku_);
    std::size_t p = k;
    double best = std::abs(at(k, k));
    for (std::size_t r = k + 1; r <= rlast; ++r) {
      const double v = std::abs(at(r, k));
      if (v > best) {
        best = v;
        p = r;
      }
    }
    piv_[k] = static_cast<int>(p);
    if (!(best > tiny) || best == 0.0) {
      std::ostringstream os;
      os << "singular matrix: pivot " << best << " at column " << k << " (threshold " << tiny << ")";
      throw SingularMatrix(os.str());
    }
    if (p != k) {
      double* rk = &at(k, k);
      double* rp = &at(p, k);
      for (std::size_t j = 0; j <= clast - k; ++j) std::swap(rk[j], rp[j]);
    }
    const double pivot = at(k, k);
    umax = std::max(umax, best);
    umin = std::min(umin, best);
    const std::size_t len = clast - k;
    for (std::size_t r = k + 1; r <= rlast; ++r) {
      double& arc = at(r, k);
      if (arc == 0.0) continue;
      const double l = arc / pivot;
      arc = l;
      if (len > 0) axpy(-l, &at(k, k + 1), &at(r, k + 1), len);
    }
  }
  pivot_ratio_ = n_ > 0 ? umax / umin : 1.0;
  if (pivot_ratio_ > kConditionWarning) warn_condition(pivot_ratio_);
}

void BandLU::solve(double* b) const {
  for (std::size_t k = 0; k < n_; ++k) {
    const std::size_t p = static_cast<std::size_t>(piv_[k]);
    if (p != k) std::swap(b[k], b[p]);
    const double bk = b[k];
    if (bk == 0.0) continue;
    const std::size_t rlast = std::min(n_ - 1, k + kl_);
    for (std::size_t r = k + 1; r <= rlast; ++r) b[r] -= at(r, k) * bk;
  }
  for (std::size_t kk = n_; kk-- > 0;) {
    const std::size_t clast = std::min(n_ - 1, kk + kl_ + ku_);
    double s = b[kk];
    const double* row = a_.data() + kk * width_ + kl_;
    for (std::size_t j = 1; j <= clast - kk; ++j) s -= row[j] * b[kk + j];
    b[kk] = s / row[0];
  }
}

void DenseSolver::factor(const SparseMatrix& J) { factor(J.to_dense()); }

void DenseSolver::factor(const Mat& J) {
  lu_.compute(J);
  const double rc = lu_.rcond();
  if (!(rc > 1e-300) || !std::isfinite(rc)) throw SingularMatrix("dense factorization: matrix is singular");
  if (1.0 / rc > kConditionWarning) warn_condition(1.0 / rc);
}

void DenseSolver::solve(Vec& b) const { b = lu_.solve(b); }

std::vector<int> invert_permutation(const std::vector<int>& order) {
  std::vector<int> pos(order.size(), -1);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const int i = order[k];
    if (i < 0 || static_cast<std::size_t>(i) >= order.size() || pos[i] != -1)
      throw Error("invalid permutation");
    pos[i] = static_cast<int>(k);
  }
  return pos;
}

std::pair<std::size_t, std::size_t> bandwidth(const SparseMatrix& J, const std::vector<int>& pos) {
  std::size_t kl = 0, ku = 0;
  const auto& rp = J.row_ptr();
  const auto& ci = J.col_idx();
  for (std::size_t r = 0; r < J.rows(); ++r) {
    const int pr = pos[r];
    for (int q = rp[r]; q < rp[r + 1]; ++q) {
      const int pc = pos[ci[q]];
      if (pr > pc) kl = std::max<std::size_t>(kl, static_cast<std::size_t>(pr - pc));
      if (pc > pr) ku = std::max<std::size_t>(ku, static_cast<std::size_t>(pc - pr));
    }
  }
  return {kl, ku};
}

void BandedSolver::factor(const SparseMatrix& J) {
  if (pos_.empty()) pos_ = invert_permutation(order_);
  if (lu_.size() != J.rows()) {
    const auto [kl, ku] = bandwidth(J, pos_);
    lu_ = BandLU(J.rows(), kl, ku);
  }
  lu_.set_zero();
  const auto& rp = J.row_ptr();
  const auto& ci = J.col_idx();
  const auto& v = J.values();
  for (std::size_t r = 0; r < J.rows(); ++r) {
    const std::size_t pr = static_cast<std::size_t>(pos_[r]);
    for (int q = rp[r]; q < rp[r + 1]; ++q) lu_.at(pr, static_cast<std::size_t>(pos_[ci[q]])) += v[q];
  }
  lu_.factor();
}

void BandedSolver::solve(Vec& b) const {
  const std::size_t n = order_.size();
  work_.resize(n);
  for (std::size_t k = 0; k < n; ++k) work_[k] = b[order_[k]];
  lu_.solve(work_.data());
  for (std::size_t k = 0; k < n; ++k) b[order_[k]] = work_[k];
}

}  // namespace cellkit::dae
