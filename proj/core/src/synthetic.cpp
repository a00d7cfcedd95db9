#include "lrpca/synthetic.hpp"

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "lrpca/error.hpp"
#include "lrpca/thresholding.hpp"

namespace lrpca {
namespace {

void CheckFraction(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::kInvalidFraction,
                "outlier fraction must lie in [0, 1], got " +
                    std::to_string(alpha));
  }
}

DenseMatrix GaussianMatrix(Index rows, Index cols, double stddev,
                           std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, stddev);
  DenseMatrix out(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) out(i, j) = normal(rng);
  }
  return out;
}

}  // namespace

ProblemInstance GenerateInstance(Index n1, Index n2, Index rank, double alpha,
                                 std::uint64_t seed) {
  if (n1 < 1 || n2 < 1) {
    throw Error(ErrorCode::kInvalidDimensions, "instance needs n1, n2 >= 1");
  }
  if (rank < 1 || rank > std::min(n1, n2)) {
    throw Error(ErrorCode::kInvalidRank, "rank outside [1, min(n1, n2)]");
  }
  CheckFraction(alpha);

  std::mt19937_64 rng(seed);
  const double stddev = 1.0 / std::sqrt(static_cast<double>(std::max(n1, n2)));
  const DenseMatrix left = GaussianMatrix(n1, rank, stddev, rng);
  const DenseMatrix right = GaussianMatrix(n2, rank, stddev, rng);

  ProblemInstance inst;
  inst.x_star = left * right.transpose();
  inst.s_star = DenseMatrix::Zero(n1, n2);
  inst.rank = rank;
  inst.alpha = alpha;
  inst.seed = seed;

  const auto total = static_cast<std::uint32_t>(n1 * n2);
  const auto count =
      static_cast<std::uint32_t>(FractionCount(alpha, n1 * n2));
  if (count > 0) {
    const double bound = inst.x_star.cwiseAbs().mean();
    // Partial Fisher-Yates: the first `count` slots are a uniform sample
    // without replacement.
    std::vector<std::uint32_t> slots(total);
    std::iota(slots.begin(), slots.end(), 0U);
    for (std::uint32_t i = 0; i < count; ++i) {
      std::uniform_int_distribution<std::uint32_t> pick(i, total - 1);
      std::swap(slots[i], slots[pick(rng)]);
    }
    std::uniform_real_distribution<double> magnitude(-bound, bound);
    double* data = inst.s_star.data();
    for (std::uint32_t i = 0; i < count; ++i) {
      double v = 0.0;
      while (v == 0.0) v = magnitude(rng);  // keep the count exact
      data[slots[i]] = v;
    }
  }
  inst.y = inst.x_star + inst.s_star;
  return inst;
}

DenseMatrix GenerateRowColSparse(Index n, double alpha, std::uint64_t seed) {
  CheckFraction(alpha);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> magnitude(0.5, 1.0);
  std::bernoulli_distribution negative(0.5);
  DenseMatrix out = DenseMatrix::Zero(n, n);
  const Index per_line = FractionCount(alpha, n);
  std::vector<Index> perm(static_cast<std::size_t>(n));
  for (Index layer = 0; layer < per_line; ++layer) {
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    for (Index i = 0; i < n; ++i) {
      const double v = magnitude(rng);
      out(i, perm[i]) = negative(rng) ? -v : v;
    }
  }
  return out;
}

InstanceSource SyntheticSource(Index n1, Index n2, Index rank, double alpha) {
  return [=](std::uint64_t seed) {
    return GenerateInstance(n1, n2, rank, alpha, seed);
  };
}

}  // namespace lrpca
