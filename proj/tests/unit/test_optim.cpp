#include <gtest/gtest.h>

#include <cmath>

#include "nforge/errors.hpp"
#include "nforge/optim.hpp"

namespace nforge {
namespace {

struct Scalar {
  Tensor x{{1}, 0.0};
  Tensor g{{1}, 0.0};
  Tensor* xp[1] = {&x};
  Tensor* gp[1] = {&g};
};

TEST(Adadelta, FirstStepFromZeroAccumulators) {
  Scalar s;
  s.g[0] = 1.0;
  AdadeltaState st;
  adadelta_step(s.xp, s.gp, st);
  const double expected = -std::sqrt(1e-6) / std::sqrt(0.05 + 1e-6);
  EXPECT_NEAR(s.x[0], expected, 1e-15);
  EXPECT_LT(std::abs(s.x[0]), 0.01);
  EXPECT_NEAR(st.sq_grad[0][0], 0.05, 1e-15);
  EXPECT_NEAR(st.sq_update[0][0], 0.05 * expected * expected, 1e-20);
}

TEST(Adadelta, ZeroGradientDecaysAccumulators) {
  Scalar s;
  s.g[0] = 2.0;
  AdadeltaState st;
  adadelta_step(s.xp, s.gp, st);
  const double sq = st.sq_grad[0][0], up = st.sq_update[0][0], x = s.x[0];
  s.g[0] = 0.0;
  adadelta_step(s.xp, s.gp, st);
  EXPECT_DOUBLE_EQ(st.sq_grad[0][0], 0.95 * sq);
  EXPECT_DOUBLE_EQ(st.sq_update[0][0], 0.95 * up);
  EXPECT_EQ(s.x[0], x);
}

TEST(Adadelta, UpdateIsInsensitiveToGradientScale) {
  Scalar a, b;
  AdadeltaState sa, sb;
  for (int i = 0; i < 10000; ++i) {
    a.g[0] = 1.0;
    b.g[0] = 1000.0;
    adadelta_step(a.xp, a.gp, sa);
    adadelta_step(b.xp, b.gp, sb);
    ASSERT_GE(sa.sq_grad[0][0], 0.0);
    ASSERT_GE(sa.sq_update[0][0], 0.0);
  }
  EXPECT_TRUE(std::isfinite(a.x[0]));
  EXPECT_LT(a.x[0], 0.0);
  // Only eps breaks the invariance; its weight relative to E[g^2] = 1 is 1e-6
  // per step and compounds over the run.
  EXPECT_NEAR(a.x[0] / b.x[0], 1.0, 1e-3);
}

TEST(Adadelta, RandomGradientsKeepAccumulatorsNonNegative) {
  Tensor x({5}), g({5});
  Tensor* xp[1] = {&x};
  Tensor* gp[1] = {&g};
  AdadeltaState st;
  std::uint64_t z = 17;
  for (int i = 0; i < 2000; ++i) {
    for (double& v : g.data()) {
      z = z * 6364136223846793005ULL + 1442695040888963407ULL;
      v = static_cast<double>(z >> 11) * 0x1.0p-53 * 20.0 - 10.0;
    }
    adadelta_step(xp, gp, st);
    for (double v : st.sq_grad[0].data()) ASSERT_GE(v, 0.0);
    for (double v : st.sq_update[0].data()) ASSERT_GE(v, 0.0);
  }
}

TEST(Adadelta, ShapeMismatchRejected) {
  Tensor x({3}), g({4});
  Tensor* xp[1] = {&x};
  Tensor* gp[1] = {&g};
  AdadeltaState st;
  EXPECT_THROW(adadelta_step(xp, gp, st), ShapeError);
}

TEST(Sgd, UnitRateOnQuadraticJumpsToMinimum) {
  Scalar s;
  s.x[0] = 3.0;
  s.g[0] = s.x[0];
  sgd_step(s.xp, s.gp, SgdState{1.0});
  EXPECT_EQ(s.x[0], 0.0);
}

TEST(Sgd, QuadraticBowlContractsGeometrically) {
  // f = x^2, g = 2x, lr 0.1: x_k = 0.8^k x_0.
  Scalar s;
  s.x[0] = 1.0;
  for (int k = 1; k <= 30; ++k) {
    s.g[0] = 2.0 * s.x[0];
    sgd_step(s.xp, s.gp, SgdState{});
    EXPECT_NEAR(s.x[0], std::pow(0.8, k), 1e-14);
  }
}

TEST(Optimizer, DispatchesOnKind) {
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::kSgd;
  cfg.learning_rate = 0.5;
  Scalar s;
  s.x[0] = 1.0;
  s.g[0] = 1.0;
  Optimizer(cfg).step(s.xp, s.gp);
  EXPECT_EQ(s.x[0], 0.5);
  EXPECT_EQ(parse_optimizer(optimizer_name(OptimizerKind::kAdadelta)), OptimizerKind::kAdadelta);
  EXPECT_THROW(parse_optimizer("adam"), ArgumentError);
}

}  // namespace
}  // namespace nforge
