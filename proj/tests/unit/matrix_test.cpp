#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lrpca/error.hpp"
#include "lrpca/matrix.hpp"
#include "support/oracles.hpp"

namespace lrpca {
namespace {

DenseMatrix Mat(Index rows, Index cols, std::initializer_list<double> values) {
  DenseMatrix m(rows, cols);
  Index i = 0;
  for (double v : values) m.data()[i++] = v;
  return m;
}

void ExpectCode(ErrorCode code, auto&& fn) {
  try {
    fn();
    FAIL() << "expected " << ToString(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

TEST(MatrixNorm, FrobeniusOfPythagoreanRow) {
  EXPECT_DOUBLE_EQ(MatrixNorm(Mat(1, 2, {3, -4}), NormKind::kFrobenius), 5.0);
}

TEST(MatrixNorm, MaxAbsIsLargestMagnitude) {
  EXPECT_DOUBLE_EQ(MatrixNorm(Mat(1, 2, {3, -4}), NormKind::kMaxAbs), 4.0);
}

TEST(MatrixNorm, TwoToInfIsLargestRowNorm) {
  EXPECT_DOUBLE_EQ(MatrixNorm(Mat(2, 2, {3, 4, 0, 1}), NormKind::kTwoToInf),
                   5.0);
}

TEST(MatrixNorm, OneToInfIsLargestRowSum) {
  EXPECT_DOUBLE_EQ(MatrixNorm(Mat(2, 2, {3, -4, 0, 1}), NormKind::kOneToInf),
                   7.0);
}

TEST(MatrixNorm, SpectralMatchesJacobiOracle) {
  std::mt19937_64 rng(11);
  const DenseMatrix m = oracle::RandomMatrix(20, 12, rng);
  const double expected = oracle::JacobiSvd(m).sigma[0];
  EXPECT_NEAR(MatrixNorm(m, NormKind::kSpectral), expected, 1e-8 * expected);
}

TEST(MatrixNorm, EmptyMatrixIsRejected) {
  ExpectCode(ErrorCode::kInvalidDimensions,
             [] { MatrixNorm(DenseMatrix(0, 3), NormKind::kFrobenius); });
}

TEST(MatrixNorm, SpectralFrobeniusSandwich) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const DenseMatrix m = oracle::RandomMatrix(15, 9, rng);
    const double spec = MatrixNorm(m, NormKind::kSpectral);
    const double fro = MatrixNorm(m, NormKind::kFrobenius);
    EXPECT_LE(spec, fro * (1 + 1e-12));
    EXPECT_LE(fro, std::sqrt(9.0) * spec * (1 + 1e-12));
  }
}

TEST(TruncatedSvd, ExactRankOneInput) {
  Vector u = Vector::Zero(6);
  Vector v = Vector::Zero(4);
  u << 1, 2, 0, -1, 3, 1;
  v << 2, -1, 1, 0;
  u.normalize();
  v.normalize();
  const DenseMatrix m = 5.0 * u * v.transpose();
  const TruncatedSvd svd = ComputeTruncatedSvd(m, 1, 1);
  ASSERT_EQ(svd.sigma.size(), 1);
  EXPECT_NEAR(svd.sigma(0), 5.0, 1e-12);
}

TEST(TruncatedSvd, DiagonalInput) {
  const DenseMatrix m = Mat(3, 3, {3, 0, 0, 0, 2, 0, 0, 0, 1});
  const TruncatedSvd svd = ComputeTruncatedSvd(m, 2, 1);
  EXPECT_NEAR(svd.sigma(0), 3.0, 1e-12);
  EXPECT_NEAR(svd.sigma(1), 2.0, 1e-12);
}

TEST(TruncatedSvd, Random30x30Seed7MatchesJacobi) {
  std::mt19937_64 rng(7);
  const DenseMatrix m = oracle::RandomMatrix(30, 30, rng);
  const TruncatedSvd svd = ComputeTruncatedSvd(m, 3, 7);
  const DenseMatrix best = oracle::BestRankApprox(m, 3);
  EXPECT_LE(oracle::RelFro(svd.Reconstruct(), best), 1e-9);
}

TEST(TruncatedSvd, FactorsAreOrthonormalAndSorted) {
  std::mt19937_64 rng(5);
  const DenseMatrix m = oracle::RandomMatrix(80, 60, rng);
  const TruncatedSvd svd = ComputeTruncatedSvd(m, 5, 9);
  const DenseMatrix eye = DenseMatrix::Identity(5, 5);
  EXPECT_LE((svd.u.transpose() * svd.u - eye).norm(), 1e-10);
  EXPECT_LE((svd.v.transpose() * svd.v - eye).norm(), 1e-10);
  for (Index i = 0; i + 1 < svd.sigma.size(); ++i) {
    EXPECT_GE(svd.sigma(i), svd.sigma(i + 1));
  }
  EXPECT_GE(svd.sigma(4), 0.0);
}

TEST(TruncatedSvd, FullRankReconstructs) {
  std::mt19937_64 rng(8);
  const DenseMatrix m = oracle::RandomMatrix(12, 7, rng);
  const TruncatedSvd svd = ComputeTruncatedSvd(m, 7, 2);
  EXPECT_LE(oracle::RelFro(svd.Reconstruct(), m), 1e-9);
}

TEST(TruncatedSvd, LargeSketchPathMatchesJacobi) {
  // 100 x 40 with rank 5 goes through subspace iteration.
  std::mt19937_64 rng(21);
  const DenseMatrix m = oracle::RandomMatrix(100, 40, rng);
  const TruncatedSvd svd = ComputeTruncatedSvd(m, 5, 3);
  EXPECT_LE(oracle::RelFro(svd.Reconstruct(), oracle::BestRankApprox(m, 5)),
            1e-9);
}

TEST(TruncatedSvd, DeterministicGivenSeed) {
  std::mt19937_64 rng(4);
  const DenseMatrix m = oracle::RandomMatrix(70, 50, rng);
  const TruncatedSvd a = ComputeTruncatedSvd(m, 4, 17);
  const TruncatedSvd b = ComputeTruncatedSvd(m, 4, 17);
  EXPECT_EQ(a.u, b.u);
  EXPECT_EQ(a.sigma, b.sigma);
  EXPECT_EQ(a.v, b.v);
}

TEST(TruncatedSvd, RankBeyondShapeIsRejected) {
  ExpectCode(ErrorCode::kInvalidRank,
             [] { ComputeTruncatedSvd(DenseMatrix::Ones(3, 2), 3, 0); });
  ExpectCode(ErrorCode::kInvalidRank,
             [] { ComputeTruncatedSvd(DenseMatrix::Ones(3, 2), 0, 0); });
}

TEST(GramSolve, DiagonalInverse) {
  const DenseMatrix w =
      GramSolve(DenseMatrix::Identity(2, 2), Mat(2, 2, {2, 0, 0, 4}));
  EXPECT_TRUE(w.isApprox(Mat(2, 2, {0.5, 0, 0, 0.25}), 1e-15));
}

TEST(GramSolve, IdentityGramReturnsInput) {
  std::mt19937_64 rng(1);
  const DenseMatrix v = oracle::RandomMatrix(7, 3, rng);
  EXPECT_EQ(GramSolve(v, DenseMatrix::Identity(3, 3)), v);
}

TEST(GramSolve, ZeroGramIsSingular) {
  ExpectCode(ErrorCode::kSingularGram, [] {
    GramSolve(DenseMatrix::Ones(4, 2), DenseMatrix::Zero(2, 2));
  });
}

TEST(GramSolve, RankDeficientGramIsSingular) {
  DenseMatrix r(5, 2);
  r.col(0).setOnes();
  r.col(1).setOnes();
  ExpectCode(ErrorCode::kSingularGram, [&] {
    GramSolve(DenseMatrix::Ones(4, 2), r.transpose() * r);
  });
}

TEST(GramSolve, ResidualProperty) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 50; ++t) {
    const DenseMatrix f = oracle::RandomMatrix(30, 6, rng);
    const DenseMatrix gram = f.transpose() * f;
    const DenseMatrix v = oracle::RandomMatrix(40, 6, rng);
    const DenseMatrix w = GramSolve(v, gram);
    EXPECT_LE((w * gram - v).norm(), 1e-10 * v.norm());
  }
}

TEST(RequireFinite, RejectsNan) {
  DenseMatrix m = DenseMatrix::Zero(2, 2);
  m(1, 0) = std::nan("");
  ExpectCode(ErrorCode::kInvalidInput, [&] { RequireFinite(m, "m"); });
}

}  // namespace
}  // namespace lrpca
