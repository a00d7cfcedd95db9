#include "lrpca/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "lrpca/error.hpp"

namespace lrpca {
namespace {

constexpr double kSpectralTol = 1e-10;
constexpr int kSpectralMaxIters = 1000;

constexpr Index kOversampling = 10;
constexpr int kMinPowerPasses = 4;
constexpr int kMaxPowerPasses = 1000;
constexpr double kSubspaceTol = 1e-12;

constexpr double kGramPivotTol = 1e-14;

using ColMatrix = Eigen::MatrixXd;

ColMatrix Orthonormalize(const ColMatrix& a) {
  Eigen::HouseholderQR<ColMatrix> qr(a);
  return qr.householderQ() * ColMatrix::Identity(a.rows(), a.cols());
}

ColMatrix GaussianSketch(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  ColMatrix out(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) out(i, j) = normal(rng);
  }
  return out;
}

TruncatedSvd DenseSvd(const DenseMatrix& m, Index rank) {
  Eigen::BDCSVD<ColMatrix> svd(ColMatrix(m),
                               Eigen::ComputeThinU | Eigen::ComputeThinV);
  TruncatedSvd out;
  out.u = svd.matrixU().leftCols(rank);
  out.sigma = svd.singularValues().head(rank);
  out.v = svd.matrixV().leftCols(rank);
  return out;
}

double SpectralNorm(const DenseMatrix& m) {
  std::mt19937_64 rng(0x5eedULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector x(m.cols());
  for (Index i = 0; i < x.size(); ++i) x(i) = normal(rng);
  x.normalize();

  double estimate = 0.0;
  for (int iter = 0; iter < kSpectralMaxIters; ++iter) {
    const Vector mx = m * x;
    const double next = mx.norm();
    if (next == 0.0) return 0.0;
    Vector y = m.transpose() * mx;
    const double ynorm = y.norm();
    if (ynorm == 0.0) return next;
    x = y / ynorm;
    if (std::abs(next - estimate) <= kSpectralTol * next) return next;
    estimate = next;
  }
  return estimate;
}

}  // namespace

double MatrixNorm(const DenseMatrix& m, NormKind kind) {
  if (m.size() == 0) {
    throw Error(ErrorCode::kInvalidDimensions, "norm of an empty matrix");
  }
  switch (kind) {
    case NormKind::kFrobenius:
      return m.norm();
    case NormKind::kMaxAbs:
      return m.cwiseAbs().maxCoeff();
    case NormKind::kTwoToInf:
      return m.rowwise().norm().maxCoeff();
    case NormKind::kOneToInf:
      return m.cwiseAbs().rowwise().sum().maxCoeff();
    case NormKind::kSpectral:
      return SpectralNorm(m);
  }
  return 0.0;
}

void RequireFinite(const DenseMatrix& m, std::string_view what) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::kInvalidInput,
                std::string(what) + " contains non-finite entries");
  }
}

DenseMatrix TruncatedSvd::Reconstruct() const {
  return u * sigma.asDiagonal() * v.transpose();
}

TruncatedSvd ComputeTruncatedSvd(const DenseMatrix& m, Index rank,
                                 std::uint64_t seed) {
  const Index min_dim = std::min(m.rows(), m.cols());
  if (rank < 1 || rank > min_dim) {
    throw Error(ErrorCode::kInvalidRank,
                "rank " + std::to_string(rank) + " outside [1, " +
                    std::to_string(min_dim) + "]");
  }
  const Index width = rank + kOversampling;
  if (width >= min_dim) return DenseSvd(m, rank);

  // Left-subspace iterate and its Ritz estimate of the leading singular
  // vectors; convergence is judged on sigma-weighted movement of those
  // vectors so that directions carrying no energy cannot stall the loop.
  ColMatrix q = Orthonormalize(m * GaussianSketch(m.cols(), width, seed));
  ColMatrix u_prev;
  bool converged = false;
  for (int pass = 1; pass <= kMaxPowerPasses; ++pass) {
    const ColMatrix z = Orthonormalize(m.transpose() * q);
    const ColMatrix mz = m * z;
    q = Orthonormalize(mz);

    Eigen::JacobiSVD<ColMatrix> small(q.transpose() * mz, Eigen::ComputeFullU);
    const ColMatrix u_cur = q * small.matrixU().leftCols(rank);
    const Vector weights = small.singularValues().head(rank);
    if (pass > 1) {
      const ColMatrix drift =
          (u_cur - u_prev * (u_prev.transpose() * u_cur)) *
          weights.asDiagonal();
      const double scale = weights.norm();
      const double moved = scale > 0.0 ? drift.norm() / scale : 0.0;
      if (pass >= kMinPowerPasses && moved < kSubspaceTol) {
        converged = true;
        break;
      }
    }
    u_prev = u_cur;
  }
  if (!converged) {
    throw Error(ErrorCode::kConvergenceFailure,
                "truncated SVD subspace iteration did not settle");
  }

  const ColMatrix b = q.transpose() * m;  // width x cols
  Eigen::JacobiSVD<ColMatrix> core(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
  TruncatedSvd out;
  out.u = q * core.matrixU().leftCols(rank);
  out.sigma = core.singularValues().head(rank);
  out.v = core.matrixV().leftCols(rank);
  return out;
}

DenseMatrix GramSolve(const DenseMatrix& v, const DenseMatrix& gram) {
  if (gram.rows() != gram.cols() || v.cols() != gram.rows() ||
      gram.size() == 0) {
    throw Error(ErrorCode::kInvalidDimensions,
                "gram solve needs an r x r Gram matrix matching V's columns");
  }
  const ColMatrix g = gram;
  const double max_diag = g.diagonal().cwiseAbs().maxCoeff();
  Eigen::LDLT<ColMatrix> ldlt(g);
  const Vector pivots = ldlt.vectorD();
  if (ldlt.info() != Eigen::Success || !(max_diag > 0.0) ||
      pivots.minCoeff() <= kGramPivotTol * max_diag) {
    throw Error(ErrorCode::kSingularGram,
                "Gram matrix is singular or indefinite (factor collapse)");
  }
  // W G = V  <=>  G W^T = V^T for symmetric G.
  const ColMatrix wt = ldlt.solve(ColMatrix(v.transpose()));
  return wt.transpose();
}

}  // namespace lrpca
