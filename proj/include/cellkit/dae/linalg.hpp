#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace cellkit::dae {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Unordered (row, col, value) list; duplicates are summed on assembly.
struct Triplets {
  std::vector<int> row;
  std::vector<int> col;
  std::vector<double> val;

  void clear() {
    row.clear();
    col.clear();
    val.clear();
  }
  void add(int r, int c, double v) {
    row.push_back(r);
    col.push_back(c);
    val.push_back(v);
  }
  std::size_t size() const { return val.size(); }
};

/// Compressed-row matrix with a pattern fixed at construction.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols, const Triplets& t);

  /// Overwrites the values from a triplet list with the same pattern sequence
  /// as the one used at construction (cached scatter map).
  void refill(const Triplets& t);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }
  const std::vector<int>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& col_idx() const { return col_idx_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  /// Value at (r, c); zero outside the pattern.
  double coeff(int r, int c) const;
  bool in_pattern(int r, int c) const;
  Mat to_dense() const;
  Vec multiply(const Vec& x) const;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> col_idx_;
  std::vector<double> values_;
  std::vector<int> scatter_;
};

/// Band matrix with partial-pivoting LU.  Entry (i, j) is stored for
/// j - i in [-kl, ku + kl]; the extra kl super-diagonals hold pivoting fill.
class BandLU {
 public:
  BandLU() = default;
  BandLU(std::size_t n, std::size_t kl, std::size_t ku);

  void set_zero();
  double& at(std::size_t i, std::size_t j) { return a_[i * width_ + (j + kl_ - i)]; }
  double at(std::size_t i, std::size_t j) const { return a_[i * width_ + (j + kl_ - i)]; }
  bool in_band(std::size_t i, std::size_t j) const { return j + kl_ >= i && j <= i + ku_; }

  /// Throws SingularMatrix when a pivot is below rel_pivot_tol * max|A|.
  void factor(double rel_pivot_tol = 1e-15);
  void solve(double* b) const;

  std::size_t size() const { return n_; }
  std::size_t lower() const { return kl_; }
  std::size_t upper() const { return ku_; }
  /// Ratio of largest to smallest |U_ii|; a cheap lower-quality condition indicator.
  double pivot_ratio() const { return pivot_ratio_; }

 private:
  std::size_t n_ = 0, kl_ = 0, ku_ = 0, width_ = 0;
  std::vector<double> a_;
  std::vector<int> piv_;
  double pivot_ratio_ = 1.0;
};

/// Factor-then-solve interface shared by the Newton driver.
class LinearSolver {
 public:
  virtual ~LinearSolver() = default;
  virtual void factor(const SparseMatrix& J) = 0;
  virtual void solve(Vec& b) const = 0;
};

class DenseSolver final : public LinearSolver {
 public:
  void factor(const SparseMatrix& J) override;
  void factor(const Mat& J);
  void solve(Vec& b) const override;

 private:
  Eigen::PartialPivLU<Mat> lu_;
};

/// Banded solver for a symmetric reordering of the unknowns.  `order[k]` is
/// the original index placed at position k.
class BandedSolver final : public LinearSolver {
 public:
  explicit BandedSolver(std::vector<int> order) : order_(std::move(order)) {}
  void factor(const SparseMatrix& J) override;
  void solve(Vec& b) const override;
  const BandLU& band() const { return lu_; }

 private:
  std::vector<int> order_;
  std::vector<int> pos_;
  BandLU lu_;
  mutable std::vector<double> work_;
};

/// Lower/upper bandwidth of a pattern under a symmetric permutation given as
/// position-of-index.
std::pair<std::size_t, std::size_t> bandwidth(const SparseMatrix& J, const std::vector<int>& pos);

std::vector<int> invert_permutation(const std::vector<int>& order);

/// Warns through the logger when an estimated condition number exceeds this.
inline constexpr double kConditionWarning = 1e12;

}  // namespace cellkit::dae
