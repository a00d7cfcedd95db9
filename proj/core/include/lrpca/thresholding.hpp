#pragma once

#include <utility>
#include <vector>

#include "lrpca/matrix.hpp"

namespace lrpca {

// Set of (row, col) positions inside a fixed shape, kept sorted row-major.
class SupportSet {
 public:
  using Entry = std::pair<Index, Index>;

  SupportSet(Index rows, Index cols) : rows_(rows), cols_(cols) {}
  // Sorts and de-duplicates; throws kInvalidInput for out-of-shape entries.
  SupportSet(Index rows, Index cols, std::vector<Entry> entries);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<Entry>& entries() const { return entries_; }

  bool Contains(Index row, Index col) const;
  bool IsSubsetOf(const SupportSet& other) const;

  friend bool operator==(const SupportSet&, const SupportSet&) = default;

 private:
  Index rows_;
  Index cols_;
  std::vector<Entry> entries_;
};

// Number of entries retained when keeping a fraction of `n`: floor(f * n),
// with a 1e-9 guard so that e.g. 0.29 * 100 counts as 29.
Index FractionCount(double fraction, Index n);

/// Entrywise shrinkage sign(m) * max(0, |m| - zeta).
/// Throws kInvalidThreshold for negative (or NaN) zeta.
DenseMatrix SoftThreshold(const DenseMatrix& m, double zeta);

/// Keeps entry (i, j) iff |m_ij| is at least the k_row-th largest magnitude
/// of row i and at least the k_col-th largest magnitude of column j, with
/// k_row = floor(alpha_tilde * cols) and k_col = floor(alpha_tilde * rows).
/// Ties at the cut-off are kept. A zero keep-count zeroes the output.
/// Throws kInvalidFraction unless 0 <= alpha_tilde <= 1.
DenseMatrix SparsifyTopFraction(const DenseMatrix& m, double alpha_tilde);

// Positions with |m_ij| > tol (strict).
SupportSet SupportOf(const DenseMatrix& m, double tol = 0.0);

}  // namespace lrpca
