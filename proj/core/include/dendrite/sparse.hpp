#pragma once

#include <iosfwd>
#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace dendrite {

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// Row-compressed sparsity structure with sorted column indices.
struct SparsityPattern {
  int rows = 0;
  int cols = 0;
  std::vector<int> row_ptr;
  std::vector<int> col_idx;

  /// Builds the pattern from per-row column lists (sorted and deduplicated here).
  [[nodiscard]] static SparsityPattern from_rows(int cols, std::vector<std::vector<int>> rows);

  /// Position of (r, c) in col_idx, or -1.
  [[nodiscard]] int find(int r, int c) const;
  [[nodiscard]] bool contains(int r, int c) const { return find(r, c) >= 0; }
  [[nodiscard]] std::size_t nnz() const { return col_idx.size(); }
};

/// CSR matrix over a shared, fixed sparsity pattern. Columns within a row
/// are sorted, so traversal order (and hence every reduction) is
/// deterministic.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  explicit CsrMatrix(std::shared_ptr<const SparsityPattern> pattern);

  /// Sums duplicate entries in input order.
  [[nodiscard]] static CsrMatrix from_triplets(int rows, int cols, const std::vector<Triplet>& triplets);

  [[nodiscard]] int rows() const { return pattern_ ? pattern_->rows : 0; }
  [[nodiscard]] int cols() const { return pattern_ ? pattern_->cols : 0; }
  [[nodiscard]] std::size_t nnz() const { return values_.size(); }
  [[nodiscard]] const SparsityPattern& pattern() const { return *pattern_; }
  [[nodiscard]] const std::shared_ptr<const SparsityPattern>& pattern_ptr() const { return pattern_; }
  [[nodiscard]] std::vector<double>& values() { return values_; }
  [[nodiscard]] const std::vector<double>& values() const { return values_; }

  /// Adds v at (r, c); the entry must be part of the pattern.
  void add(int r, int c, double v);
  void set_zero();
  /// Replaces row r by `diagonal` on the diagonal and zeros elsewhere.
  void set_identity_row(int r, double diagonal = 1.0);

  [[nodiscard]] double coeff(int r, int c) const;
  [[nodiscard]] Eigen::VectorXd operator*(const Eigen::VectorXd& x) const;
  [[nodiscard]] CsrMatrix transpose() const;
  [[nodiscard]] Eigen::SparseMatrix<double> to_eigen() const;
  [[nodiscard]] Eigen::MatrixXd to_dense() const;

  /// Copy without entries whose magnitude is <= threshold.
  [[nodiscard]] CsrMatrix pruned(double threshold = 1e-300) const;

 private:
  std::shared_ptr<const SparsityPattern> pattern_;
  std::vector<double> values_;
};

/// max |A_ij - B_ij| over the union of both patterns.
[[nodiscard]] double max_abs_difference(const CsrMatrix& a, const CsrMatrix& b);

/// Coordinate text export: one `i j value` line per stored entry (17 digits).
void write_coordinate(std::ostream& out, const CsrMatrix& m);

}  // namespace dendrite
