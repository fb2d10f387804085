#include "dendrite/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

#include "dendrite/error.hpp"

namespace dendrite {

SparsityPattern SparsityPattern::from_rows(int cols, std::vector<std::vector<int>> rows) {
  SparsityPattern p;
  p.rows = static_cast<int>(rows.size());
  p.cols = cols;
  p.row_ptr.reserve(rows.size() + 1);
  p.row_ptr.push_back(0);
  for (auto& r : rows) {
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    for (int c : r) {
      if (c < 0 || c >= cols) throw ValidationError("sparsity: column out of range");
      p.col_idx.push_back(c);
    }
    p.row_ptr.push_back(static_cast<int>(p.col_idx.size()));
  }
  return p;
}

int SparsityPattern::find(int r, int c) const {
  const auto begin = col_idx.begin() + row_ptr[static_cast<std::size_t>(r)];
  const auto end = col_idx.begin() + row_ptr[static_cast<std::size_t>(r) + 1];
  const auto it = std::lower_bound(begin, end, c);
  if (it == end || *it != c) return -1;
  return static_cast<int>(it - col_idx.begin());
}

CsrMatrix::CsrMatrix(std::shared_ptr<const SparsityPattern> pattern)
    : pattern_(std::move(pattern)), values_(pattern_->nnz(), 0.0) {}

CsrMatrix CsrMatrix::from_triplets(int rows, int cols, const std::vector<Triplet>& triplets) {
  std::vector<std::vector<int>> row_cols(static_cast<std::size_t>(rows));
  for (const Triplet& t : triplets) {
    if (t.row < 0 || t.row >= rows) throw ValidationError("triplet: row out of range");
    row_cols[static_cast<std::size_t>(t.row)].push_back(t.col);
  }
  CsrMatrix m(std::make_shared<const SparsityPattern>(SparsityPattern::from_rows(cols, std::move(row_cols))));
  for (const Triplet& t : triplets) m.add(t.row, t.col, t.value);
  return m;
}

void CsrMatrix::add(int r, int c, double v) {
  const int pos = pattern_->find(r, c);
  if (pos < 0) {
    throw ValidationError("CsrMatrix: entry (" + std::to_string(r) + ", " + std::to_string(c) +
                          ") outside the sparsity pattern");
  }
  values_[static_cast<std::size_t>(pos)] += v;
}

void CsrMatrix::set_zero() { std::fill(values_.begin(), values_.end(), 0.0); }

void CsrMatrix::set_identity_row(int r, double diagonal) {
  const auto& p = *pattern_;
  for (int k = p.row_ptr[static_cast<std::size_t>(r)]; k < p.row_ptr[static_cast<std::size_t>(r) + 1]; ++k) {
    values_[static_cast<std::size_t>(k)] = p.col_idx[static_cast<std::size_t>(k)] == r ? diagonal : 0.0;
  }
}

double CsrMatrix::coeff(int r, int c) const {
  const int pos = pattern_->find(r, c);
  return pos < 0 ? 0.0 : values_[static_cast<std::size_t>(pos)];
}

Eigen::VectorXd CsrMatrix::operator*(const Eigen::VectorXd& x) const {
  const auto& p = *pattern_;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(p.rows);
  for (int r = 0; r < p.rows; ++r) {
    double s = 0.0;
    for (int k = p.row_ptr[static_cast<std::size_t>(r)]; k < p.row_ptr[static_cast<std::size_t>(r) + 1]; ++k) {
      s += values_[static_cast<std::size_t>(k)] * x[p.col_idx[static_cast<std::size_t>(k)]];
    }
    y[r] = s;
  }
  return y;
}

CsrMatrix CsrMatrix::transpose() const {
  const auto& p = *pattern_;
  std::vector<Triplet> t;
  t.reserve(values_.size());
  for (int r = 0; r < p.rows; ++r) {
    for (int k = p.row_ptr[static_cast<std::size_t>(r)]; k < p.row_ptr[static_cast<std::size_t>(r) + 1]; ++k) {
      t.push_back({p.col_idx[static_cast<std::size_t>(k)], r, values_[static_cast<std::size_t>(k)]});
    }
  }
  return from_triplets(p.cols, p.rows, t);
}

Eigen::SparseMatrix<double> CsrMatrix::to_eigen() const {
  const auto& p = *pattern_;
  Eigen::Map<const Eigen::SparseMatrix<double, Eigen::RowMajor>> view(
      p.rows, p.cols, static_cast<Eigen::Index>(values_.size()), p.row_ptr.data(), p.col_idx.data(),
      values_.data());
  return Eigen::SparseMatrix<double>(view);
}

Eigen::MatrixXd CsrMatrix::to_dense() const {
  const auto& p = *pattern_;
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(p.rows, p.cols);
  for (int r = 0; r < p.rows; ++r) {
    for (int k = p.row_ptr[static_cast<std::size_t>(r)]; k < p.row_ptr[static_cast<std::size_t>(r) + 1]; ++k) {
      d(r, p.col_idx[static_cast<std::size_t>(k)]) += values_[static_cast<std::size_t>(k)];
    }
  }
  return d;
}

CsrMatrix CsrMatrix::pruned(double threshold) const {
  const auto& p = *pattern_;
  std::vector<Triplet> t;
  for (int r = 0; r < p.rows; ++r) {
    for (int k = p.row_ptr[static_cast<std::size_t>(r)]; k < p.row_ptr[static_cast<std::size_t>(r) + 1]; ++k) {
      const double v = values_[static_cast<std::size_t>(k)];
      if (std::abs(v) > threshold) t.push_back({r, p.col_idx[static_cast<std::size_t>(k)], v});
    }
  }
  return from_triplets(p.rows, p.cols, t);
}

double max_abs_difference(const CsrMatrix& a, const CsrMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ValidationError("max_abs_difference: dimension mismatch");
  }
  double worst = 0.0;
  auto scan = [&worst](const CsrMatrix& x, const CsrMatrix& y) {
    const auto& p = x.pattern();
    for (int r = 0; r < p.rows; ++r) {
      for (int k = p.row_ptr[static_cast<std::size_t>(r)]; k < p.row_ptr[static_cast<std::size_t>(r) + 1]; ++k) {
        const int c = p.col_idx[static_cast<std::size_t>(k)];
        worst = std::max(worst, std::abs(x.values()[static_cast<std::size_t>(k)] - y.coeff(r, c)));
      }
    }
  };
  scan(a, b);
  scan(b, a);
  return worst;
}

void write_coordinate(std::ostream& out, const CsrMatrix& m) {
  const auto& p = m.pattern();
  out << std::setprecision(17);
  for (int r = 0; r < p.rows; ++r) {
    for (int k = p.row_ptr[static_cast<std::size_t>(r)]; k < p.row_ptr[static_cast<std::size_t>(r) + 1]; ++k) {
      out << r << ' ' << p.col_idx[static_cast<std::size_t>(k)] << ' ' << m.values()[static_cast<std::size_t>(k)] << '\n';
    }
  }
}

}  // namespace dendrite
