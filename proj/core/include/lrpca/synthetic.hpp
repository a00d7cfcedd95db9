#pragma once

#include <cstdint>
#include <functional>

#include "lrpca/matrix.hpp"

namespace lrpca {

// Ground-truth bundle Y = X* + S* for training and benchmarks.
struct ProblemInstance {
  DenseMatrix y;
  DenseMatrix x_star;
  DenseMatrix s_star;
  Index rank = 0;
  double alpha = 0.0;
  std::uint64_t seed = 0;
};

// Produces the instance associated with a seed; must be deterministic.
using InstanceSource = std::function<ProblemInstance(std::uint64_t seed)>;

/// Random RPCA instance.
///
/// L*, R* have i.i.d. N(0, 1/n) entries with n = max(n1, n2) and
/// X* = L* R*^T. floor(alpha * n1 * n2) outlier positions are drawn uniformly
/// without replacement over the whole matrix, with values uniform on [-m, m]
/// where m is the realized mean |X*_ij|.
///
/// Throws kInvalidRank (rank outside [1, min(n1, n2)]) or kInvalidFraction.
ProblemInstance GenerateInstance(Index n1, Index n2, Index rank, double alpha,
                                 std::uint64_t seed);

// Square outlier matrix with at most floor(alpha * n) nonzeros in every row
// and every column (a union of random permutation patterns), magnitudes in
// [0.5, 1] with random signs.
DenseMatrix GenerateRowColSparse(Index n, double alpha, std::uint64_t seed);

InstanceSource SyntheticSource(Index n1, Index n2, Index rank, double alpha);

}  // namespace lrpca
