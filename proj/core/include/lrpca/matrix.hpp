#pragma once

#include <cstdint>
#include <string_view>

#include <Eigen/Core>

namespace lrpca {

// Row-major, 64-bit dense matrix. Every observation, ground truth, outlier
// estimate and factor in the library is one of these.
using DenseMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class NormKind {
  kFrobenius,
  kMaxAbs,    // largest entry magnitude
  kTwoToInf,  // largest row l2 norm
  kOneToInf,  // largest row l1 norm
  kSpectral,  // largest singular value
};

// Throws kInvalidDimensions for an empty matrix. The spectral norm is found by
// power iteration on M^T M (relative tolerance 1e-10, at most 1000 passes).
double MatrixNorm(const DenseMatrix& m, NormKind kind);

// Throws kInvalidInput when `m` holds a NaN or an infinity.
void RequireFinite(const DenseMatrix& m, std::string_view what);

struct TruncatedSvd {
  DenseMatrix u;  // rows x r, orthonormal columns
  Vector sigma;   // r values, non-increasing
  DenseMatrix v;  // cols x r, orthonormal columns

  DenseMatrix Reconstruct() const;
};

/// Best rank-`rank` approximation of `m`.
///
/// Randomized subspace iteration with 10 oversampling columns and at least
/// four power passes; passes continue until the leading `rank` singular
/// subspaces move by less than 1e-12 between passes. When the sketch would be
/// as wide as the matrix a dense decomposition is used instead. The Gaussian
/// sketch is drawn from `seed`, so the result is deterministic.
///
/// Throws kInvalidRank when rank is 0 or exceeds min(rows, cols), and
/// kConvergenceFailure when the subspace has not settled after 1000 passes.
TruncatedSvd ComputeTruncatedSvd(const DenseMatrix& m, Index rank,
                                 std::uint64_t seed);

// Returns W with W * gram = v, using a pivoted LDL^T factorization of the
// symmetric matrix `gram`. A pivot that is non-positive or below
// 1e-14 * max|diag(gram)| raises kSingularGram.
DenseMatrix GramSolve(const DenseMatrix& v, const DenseMatrix& gram);

}  // namespace lrpca
