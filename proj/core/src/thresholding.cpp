#include "lrpca/thresholding.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "lrpca/error.hpp"

namespace lrpca {
namespace {

// Magnitude of the k-th largest entry (1-based) of `values`; reorders values.
double KthLargest(std::vector<double>& values, Index k) {
  auto nth = values.begin() + (k - 1);
  std::nth_element(values.begin(), nth, values.end(), std::greater<>());
  return *nth;
}

}  // namespace

SupportSet::SupportSet(Index rows, Index cols, std::vector<Entry> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  for (const auto& [r, c] : entries_) {
    if (r < 0 || r >= rows_ || c < 0 || c >= cols_) {
      throw Error(ErrorCode::kInvalidInput, "support entry outside shape");
    }
  }
  std::sort(entries_.begin(), entries_.end());
  entries_.erase(std::unique(entries_.begin(), entries_.end()),
                 entries_.end());
}

bool SupportSet::Contains(Index row, Index col) const {
  return std::binary_search(entries_.begin(), entries_.end(),
                            Entry{row, col});
}

bool SupportSet::IsSubsetOf(const SupportSet& other) const {
  if (rows_ != other.rows_ || cols_ != other.cols_) return false;
  return std::includes(other.entries_.begin(), other.entries_.end(),
                       entries_.begin(), entries_.end());
}

Index FractionCount(double fraction, Index n) {
  return static_cast<Index>(
      std::floor(fraction * static_cast<double>(n) + 1e-9));
}

DenseMatrix SoftThreshold(const DenseMatrix& m, double zeta) {
  if (!(zeta >= 0.0)) {
    throw Error(ErrorCode::kInvalidThreshold,
                "threshold must be nonnegative, got " + std::to_string(zeta));
  }
  return m.unaryExpr([zeta](double v) {
    if (v > zeta) return v - zeta;
    if (v < -zeta) return v + zeta;
    return 0.0;
  });
}

DenseMatrix SparsifyTopFraction(const DenseMatrix& m, double alpha_tilde) {
  if (!(alpha_tilde >= 0.0 && alpha_tilde <= 1.0)) {
    throw Error(ErrorCode::kInvalidFraction,
                "fraction must lie in [0, 1], got " +
                    std::to_string(alpha_tilde));
  }
  const Index rows = m.rows();
  const Index cols = m.cols();
  const Index k_row = FractionCount(alpha_tilde, cols);
  const Index k_col = FractionCount(alpha_tilde, rows);
  DenseMatrix out = DenseMatrix::Zero(rows, cols);
  if (k_row == 0 || k_col == 0) return out;

  const DenseMatrix mag = m.cwiseAbs();
  Vector row_cut(rows);
  std::vector<double> buffer(static_cast<std::size_t>(cols));
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) buffer[j] = mag(i, j);
    row_cut(i) = KthLargest(buffer, k_row);
  }
  Vector col_cut(cols);
  buffer.resize(static_cast<std::size_t>(rows));
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) buffer[i] = mag(i, j);
    col_cut(j) = KthLargest(buffer, k_col);
  }
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      if (mag(i, j) >= row_cut(i) && mag(i, j) >= col_cut(j)) {
        out(i, j) = m(i, j);
      }
    }
  }
  return out;
}

SupportSet SupportOf(const DenseMatrix& m, double tol) {
  std::vector<SupportSet::Entry> entries;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (std::abs(m(i, j)) > tol) entries.emplace_back(i, j);
    }
  }
  return SupportSet(m.rows(), m.cols(), std::move(entries));
}

}  // namespace lrpca
