#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/LU>

#include "lrpca/error.hpp"
#include "lrpca/solver.hpp"
#include "lrpca/synthetic.hpp"
#include "lrpca/thresholding.hpp"
#include "support/oracles.hpp"

namespace lrpca {
namespace {

DenseMatrix Mat(Index rows, Index cols, std::initializer_list<double> values) {
  DenseMatrix m(rows, cols);
  Index i = 0;
  for (double v : values) m.data()[i++] = v;
  return m;
}

ErrorCode CodeOf(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kIoError;
}

SolverState StateOf(DenseMatrix left, DenseMatrix right) {
  SolverState s;
  s.sparse = DenseMatrix::Zero(left.rows(), right.rows());
  s.factors = {std::move(left), std::move(right)};
  return s;
}

double MaxAbs(const DenseMatrix& m) { return m.cwiseAbs().maxCoeff(); }

TEST(ResidualRel, Examples) {
  const DenseMatrix y = Mat(2, 2, {1, 2, 3, 4});
  const DenseMatrix x = Mat(2, 2, {0.5, 1, -1, 2});
  EXPECT_EQ(ResidualRel(y, y, DenseMatrix::Zero(2, 2)), 0.0);
  EXPECT_DOUBLE_EQ(ResidualRel(y, DenseMatrix::Zero(2, 2), DenseMatrix::Zero(2, 2)),
                   1.0);
  EXPECT_EQ(ResidualRel(y, x, y - x), 0.0);
  EXPECT_EQ(CodeOf([] {
              ResidualRel(DenseMatrix::Zero(2, 2), DenseMatrix::Zero(2, 2),
                          DenseMatrix::Zero(2, 2));
            }),
            ErrorCode::kInvalidInput);
}

TEST(LrpcaStep, ScalarHandExample) {
  const SolverState s = StateOf(Mat(1, 1, {1}), Mat(1, 1, {1}));
  const SolverState next = LrpcaStep(s, Mat(1, 1, {2}), 2.0, 0.5);
  EXPECT_EQ(next.sparse(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(next.factors.left(0, 0), 1.5);
  EXPECT_DOUBLE_EQ(next.factors.right(0, 0), 1.5);
  EXPECT_EQ(next.iteration, 1);
}

TEST(LrpcaStep, ExactSolutionIsFixedPoint) {
  const ProblemInstance inst = GenerateInstance(30, 20, 2, 0.1, 4);
  const TruncatedSvd svd = ComputeTruncatedSvd(inst.x_star, 2, 1);
  const DenseMatrix root = svd.sigma.cwiseSqrt().asDiagonal();
  const SolverState s = StateOf(svd.u * root, svd.v * root);
  // Product equals X* up to rounding; shrink by the leftover so S' = S*.
  const double leftover = MaxAbs(s.factors.Product() - inst.x_star);
  const SolverState next = LrpcaStep(s, inst.y, leftover, 0.5);
  EXPECT_LE(MaxAbs(next.sparse - inst.s_star), 2 * leftover + 1e-15);
  EXPECT_LE(oracle::RelFro(next.factors.left, s.factors.left), 1e-12);
  EXPECT_LE(oracle::RelFro(next.factors.right, s.factors.right), 1e-12);
}

TEST(LrpcaStep, ZeroResidualLeavesFactorsUntouched) {
  // zeta = 0 makes S' absorb the whole residual.
  std::mt19937_64 rng(2);
  const SolverState s =
      StateOf(oracle::RandomMatrix(8, 2, rng), oracle::RandomMatrix(6, 2, rng));
  const DenseMatrix y = oracle::RandomMatrix(8, 6, rng);
  const SolverState next = LrpcaStep(s, y, 0.0, 0.5);
  EXPECT_EQ(next.factors.left, s.factors.left);
  EXPECT_EQ(next.factors.right, s.factors.right);
  EXPECT_EQ(next.sparse, y - s.factors.Product());
}

TEST(LrpcaStep, OracleThresholdKeepsSupport) {
  const ProblemInstance inst = GenerateInstance(60, 60, 3, 0.1, 9);
  std::mt19937_64 rng(9);
  const SolverState s =
      StateOf(oracle::RandomMatrix(60, 3, rng, 0.2), oracle::RandomMatrix(60, 3, rng, 0.2));
  const double zeta = MaxAbs(inst.x_star - s.factors.Product());
  const SolverState next = LrpcaStep(s, inst.y, zeta, 0.5);
  EXPECT_TRUE(SupportOf(next.sparse).IsSubsetOf(SupportOf(inst.s_star)));
}

TEST(LrpcaStep, GaugeInvariantProduct) {
  const ProblemInstance inst = GenerateInstance(40, 30, 3, 0.1, 5);
  std::mt19937_64 rng(5);
  const DenseMatrix left = oracle::RandomMatrix(40, 3, rng, 0.3);
  const DenseMatrix right = oracle::RandomMatrix(30, 3, rng, 0.3);
  const DenseMatrix q = oracle::RandomMatrix(3, 3, rng) +
                        3.0 * DenseMatrix::Identity(3, 3);
  const DenseMatrix q_inv_t = q.inverse().transpose();
  const SolverState a = LrpcaStep(StateOf(left, right), inst.y, 0.01, 0.5);
  const SolverState b =
      LrpcaStep(StateOf(left * q, right * q_inv_t), inst.y, 0.01, 0.5);
  EXPECT_LE(oracle::RelFro(b.factors.Product(), a.factors.Product()), 1e-10);
}

TEST(LrpcaStep, CollapsedFactorsRaiseSingularGram) {
  const SolverState s = StateOf(DenseMatrix::Zero(4, 2), DenseMatrix::Zero(3, 2));
  EXPECT_EQ(CodeOf([&] { LrpcaStep(s, DenseMatrix::Ones(4, 3), 0.1, 0.5); }),
            ErrorCode::kSingularGram);
}

TEST(ScaledGdStep, ZeroFractionUsesFullResidual) {
  std::mt19937_64 rng(3);
  const SolverState s =
      StateOf(oracle::RandomMatrix(6, 2, rng), oracle::RandomMatrix(5, 2, rng));
  const DenseMatrix y = oracle::RandomMatrix(6, 5, rng);
  const SolverState next = ScaledGdStep(s, y, 0.0, 0.5);
  EXPECT_TRUE(next.sparse.isZero(0.0));
  // Same as an LRPCA step whose threshold zeroes every entry.
  const SolverState ref = LrpcaStep(s, y, 1e300, 0.5);
  EXPECT_EQ(next.factors.left, ref.factors.left);
  EXPECT_EQ(next.factors.right, ref.factors.right);
}

TEST(ScaledGdStep, FullFractionAbsorbsResidual) {
  std::mt19937_64 rng(4);
  const SolverState s =
      StateOf(oracle::RandomMatrix(6, 2, rng), oracle::RandomMatrix(5, 2, rng));
  const DenseMatrix y = oracle::RandomMatrix(6, 5, rng);
  const SolverState next = ScaledGdStep(s, y, 1.0, 0.5);
  EXPECT_EQ(next.sparse, y - s.factors.Product());
  EXPECT_EQ(next.factors.left, s.factors.left);
  EXPECT_EQ(next.factors.right, s.factors.right);
}

TEST(ScaledGdStep, TwoByTwoHandExample) {
  // X = [[1,2],[0.5,1]], Y - X = [[2,-1],[-0.5,4]]; keeping the top half of
  // each row and column leaves [[2,0],[0,4]], so E = [[0,1],[0.5,0]].
  // L' = L - 0.5 * E R / 5, R' = R - 0.5 * E^T L / 1.25.
  const SolverState s = StateOf(Mat(2, 1, {1, 0.5}), Mat(2, 1, {1, 2}));
  const SolverState next = ScaledGdStep(s, Mat(2, 2, {3, 1, 0, 5}), 0.5, 0.5);
  EXPECT_EQ(next.sparse, Mat(2, 2, {2, 0, 0, 4}));
  EXPECT_NEAR(next.factors.left(0, 0), 0.8, 1e-15);
  EXPECT_NEAR(next.factors.left(1, 0), 0.45, 1e-15);
  EXPECT_NEAR(next.factors.right(0, 0), 0.9, 1e-15);
  EXPECT_NEAR(next.factors.right(1, 0), 1.6, 1e-15);
}

TEST(SpectralInit, OutlierFreeInputIsRecovered) {
  const ProblemInstance inst = GenerateInstance(50, 40, 3, 0.0, 2);
  const SolverState s =
      SpectralInit(inst.y, 3, MaxAbs(inst.x_star), 1);
  EXPECT_TRUE(s.sparse.isZero(0.0));
  EXPECT_LE(oracle::RelFro(s.factors.Product(), inst.x_star), 1e-9);
  EXPECT_EQ(s.iteration, 0);
}

TEST(SpectralInit, OracleThresholdKeepsSupport) {
  const ProblemInstance inst = GenerateInstance(80, 80, 4, 0.2, 3);
  const SolverState s = SpectralInit(inst.y, 4, MaxAbs(inst.x_star), 1);
  EXPECT_TRUE(SupportOf(s.sparse).IsSubsetOf(SupportOf(inst.s_star)));
}

TEST(SpectralInit, FullShrinkageIsPlainSvd) {
  const ProblemInstance inst = GenerateInstance(30, 30, 2, 0.1, 4);
  const SolverState s = SpectralInit(inst.y, 2, MaxAbs(inst.y), 1);
  EXPECT_TRUE(s.sparse.isZero(0.0));
  EXPECT_LE(oracle::RelFro(s.factors.Product(),
                           oracle::BestRankApprox(inst.y, 2)),
            1e-9);
}

TEST(SpectralInit, RankTooLarge) {
  EXPECT_EQ(CodeOf([] { SpectralInit(DenseMatrix::Ones(3, 3), 4, 0.0, 0); }),
            ErrorCode::kInvalidRank);
}

TEST(StopRule, Validation) {
  EXPECT_EQ(CodeOf([] { StopRule{StopMode::kResidualRel, -1.0, 10}.Validate(); }),
            ErrorCode::kInvalidInput);
  EXPECT_EQ(CodeOf([] { StopRule{StopMode::kResidualRel, 1e-3, 0}.Validate(); }),
            ErrorCode::kInvalidInput);
  StopRule{StopMode::kFixedIters, 0.0, 0}.Validate();
}

TEST(StopMode, NamesRoundTrip) {
  for (StopMode m : {StopMode::kResidualRel, StopMode::kIterateChange,
                     StopMode::kFixedIters}) {
    EXPECT_EQ(ParseStopMode(ToString(m)), m);
  }
  EXPECT_EQ(CodeOf([] { ParseStopMode("sometimes"); }), ErrorCode::kInvalidInput);
}

TEST(Solve, OutlierFreeOracleStopsAtInitialization) {
  const ProblemInstance inst = GenerateInstance(60, 60, 3, 0.0, 1);
  const SolveResult res = Solve(inst.y, 3, OracleSchedule{}, {StopMode::kResidualRel, 1e-6, 50},
                                &inst.x_star);
  EXPECT_EQ(res.trace.Iterations(), 0);
  EXPECT_LT(res.trace.records[0].residual_rel, 1e-12);
  EXPECT_TRUE(res.stopped_by_rule);
}

TEST(Solve, OracleWithoutTruthIsRejected) {
  const ProblemInstance inst = GenerateInstance(20, 20, 2, 0.1, 1);
  EXPECT_EQ(CodeOf([&] {
              Solve(inst.y, 2, OracleSchedule{}, {StopMode::kResidualRel, 1e-6, 5});
            }),
            ErrorCode::kMissingGroundTruth);
}

TEST(Solve, FixedZeroThresholdNeverMovesFactors) {
  const ProblemInstance inst = GenerateInstance(40, 40, 2, 0.0, 6);
  const SolveResult res = Solve(inst.y, 2, FixedSchedule{0.0, 0.5},
                                {StopMode::kFixedIters, 0.0, 5}, &inst.x_star);
  const SolverState init = SpectralInit(inst.y, 2, 0.0, 0);
  ASSERT_EQ(res.trace.Iterations(), 5);
  for (const auto& rec : res.trace.records) EXPECT_EQ(rec.residual_rel, 0.0);
  EXPECT_EQ(res.low_rank, init.factors.Product());
}

TEST(Solve, FixedZeroIterationsRecordsOnlyInitialization) {
  const ProblemInstance inst = GenerateInstance(30, 30, 2, 0.1, 6);
  const SolveResult res = Solve(inst.y, 2, OracleSchedule{},
                                {StopMode::kFixedIters, 0.0, 0}, &inst.x_star);
  EXPECT_EQ(res.trace.records.size(), 1u);
  EXPECT_TRUE(std::isnan(res.trace.records[0].eta));
}

TEST(Solve, TraceHasOneRecordPerIteration) {
  const ProblemInstance inst = GenerateInstance(60, 60, 3, 0.1, 2);
  const SolveResult res = Solve(inst.y, 3, OracleSchedule{},
                                {StopMode::kFixedIters, 0.0, 7}, &inst.x_star);
  ASSERT_EQ(res.trace.records.size(), 8u);
  for (int k = 0; k <= 7; ++k) EXPECT_EQ(res.trace.records[k].iter, k);
  for (int k = 1; k <= 7; ++k) {
    EXPECT_EQ(res.trace.records[k].eta, 0.5);
    EXPECT_GE(res.trace.records[k].wall_ms, res.trace.records[k - 1].wall_ms);
  }
  EXPECT_TRUE(res.stopped_by_rule);
}

TEST(Solve, CapWithoutConvergenceIsReported) {
  const ProblemInstance inst = GenerateInstance(60, 60, 3, 0.1, 2);
  const SolveResult res = Solve(inst.y, 3, OracleSchedule{},
                                {StopMode::kResidualRel, 1e-30, 3}, &inst.x_star);
  EXPECT_EQ(res.trace.Iterations(), 3);
  EXPECT_FALSE(res.stopped_by_rule);
}

TEST(Solve, IterateChangeRuleFires) {
  const ProblemInstance inst = GenerateInstance(100, 100, 3, 0.1, 3);
  const SolveResult res = Solve(inst.y, 3, OracleSchedule{},
                                {StopMode::kIterateChange, 1e-3, 200}, &inst.x_star);
  EXPECT_TRUE(res.stopped_by_rule);
  EXPECT_LT(res.trace.Iterations(), 200);
}

TEST(Solve, WithoutTruthRelErrIsNan) {
  const ProblemInstance inst = GenerateInstance(30, 30, 2, 0.1, 3);
  const SolveResult res = Solve(inst.y, 2, FixedSchedule{0.01, 0.5},
                                {StopMode::kFixedIters, 0.0, 2});
  for (const auto& rec : res.trace.records) EXPECT_TRUE(std::isnan(rec.rel_err));
}

TEST(Solve, Deterministic) {
  const ProblemInstance inst = GenerateInstance(80, 60, 3, 0.1, 8);
  const StopRule stop{StopMode::kResidualRel, 1e-8, 60};
  const SolveResult a = Solve(inst.y, 3, OracleSchedule{}, stop, &inst.x_star, {5, {}});
  const SolveResult b = Solve(inst.y, 3, OracleSchedule{}, stop, &inst.x_star, {5, {}});
  EXPECT_EQ(a.low_rank, b.low_rank);
  EXPECT_EQ(a.sparse, b.sparse);
  ASSERT_EQ(a.trace.records.size(), b.trace.records.size());
  for (std::size_t i = 0; i < a.trace.records.size(); ++i) {
    EXPECT_EQ(a.trace.records[i].rel_err, b.trace.records[i].rel_err);
  }
}

TEST(Solve, LearnedScheduleFollowsItsTail) {
  const ProblemInstance inst = GenerateInstance(60, 60, 3, 0.1, 2);
  const ParamSchedule theta({0.05, 0.02, 0.01}, {0.5, 0.6}, 0.9, 0.8);
  const SolveResult res = Solve(inst.y, 3, theta, {StopMode::kFixedIters, 0.0, 5},
                                &inst.x_star);
  EXPECT_EQ(res.trace.records[0].zeta, 0.05);
  for (int k = 1; k <= 5; ++k) {
    const StepParams p = ScheduleAt(theta, k);
    EXPECT_EQ(res.trace.records[k].zeta, p.zeta);
    EXPECT_EQ(res.trace.records[k].eta, p.eta);
  }
}

// Oracle thresholds never flag a clean entry, at any iteration.
TEST(SolveProperty, OracleSupportContainmentEveryIteration) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const ProblemInstance inst = GenerateInstance(150, 150, 5, 0.1, seed);
    const SupportSet truth = SupportOf(inst.s_star);
    int checked = 0;
    SolveOptions opts;
    opts.on_iterate = [&](const SolverState& s) {
      ++checked;
      EXPECT_TRUE(SupportOf(s.sparse).IsSubsetOf(truth))
          << "seed " << seed << " iteration " << s.iteration;
    };
    Solve(inst.y, 5, OracleSchedule{0.5}, {StopMode::kFixedIters, 0.0, 30},
          &inst.x_star, opts);
    EXPECT_EQ(checked, 31);
  }
}

TEST(SolveProperty, OracleErrorNonIncreasingAfterThirdIteration) {
  for (double eta : {0.25, 0.5, 0.7, 8.0 / 9.0}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const ProblemInstance inst = GenerateInstance(200, 200, 5, 0.1, seed);
      const SolveResult res = Solve(inst.y, 5, OracleSchedule{eta},
                                    {StopMode::kFixedIters, 0.0, 40}, &inst.x_star);
      const auto& recs = res.trace.records;
      for (std::size_t k = 4; k < recs.size(); ++k) {
        if (recs[k - 1].rel_err < 1e-13) break;  // at the floating-point floor
        EXPECT_LE(recs[k].rel_err, recs[k - 1].rel_err)
            << "eta " << eta << " seed " << seed << " iter " << k;
      }
    }
  }
}

TEST(SolveProperty, OracleStepAtSolutionBarelyMoves) {
  const ProblemInstance inst = GenerateInstance(100, 100, 3, 0.1, 4);
  const SolveResult res = Solve(inst.y, 3, OracleSchedule{0.5},
                                {StopMode::kResidualRel, 1e-15, 400}, &inst.x_star);
  ASSERT_LE(res.trace.records.back().rel_err, 1e-12);
  SolverState s;
  s.factors = res.factors;
  s.sparse = res.sparse;
  const double zeta = MaxAbs(inst.x_star - s.factors.Product());
  const SolverState next = LrpcaStep(s, inst.y, zeta, 0.5);
  EXPECT_LE(oracle::RelFro(next.factors.left, s.factors.left), 1e-10);
  EXPECT_LE(oracle::RelFro(next.factors.right, s.factors.right), 1e-10);
}

TEST(SolveScaledGd, ReachesToleranceOnEasyInstance) {
  const ProblemInstance inst = GenerateInstance(200, 200, 5, 0.1, 1);
  const SolveResult res =
      SolveScaledGd(inst.y, 5, {0.2, 0.5}, {StopMode::kResidualRel, 1e-6, 200},
                    &inst.x_star);
  EXPECT_TRUE(res.stopped_by_rule);
  EXPECT_TRUE(std::isnan(res.trace.records[1].zeta));
}

}  // namespace
}  // namespace lrpca
