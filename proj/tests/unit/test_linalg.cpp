#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"
#include "nforge/errors.hpp"
#include "nforge/linalg.hpp"

namespace nforge {
namespace {

using test::random_symmetric;
using test::random_tensor;

// Triple loop, ascending k, same accumulation step as the kernel.
Tensor naive_matmul(const Tensor& a, const Tensor& b) {
  Tensor c({a.dim(0), b.dim(1)});
  for (std::size_t i = 0; i < a.dim(0); ++i)
    for (std::size_t j = 0; j < b.dim(1); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.dim(1); ++k) s = gemm_madd(a(i, k), b(k, j), s);
      c(i, j) = s;
    }
  return c;
}

TEST(Matmul, IdentityLeavesMatrixUnchanged) {
  Rng rng(1);
  const Tensor b = random_tensor({3, 3}, rng);
  EXPECT_EQ(matmul(Tensor::identity(3), b), b);
}

TEST(Matmul, HandExample) {
  const Tensor c = matmul(Tensor::matrix({{1, 2}, {3, 4}}), Tensor::matrix({{0}, {1}}));
  EXPECT_EQ(c, Tensor::matrix({{2}, {4}}));
}

TEST(Matmul, MismatchNamesBothShapes) {
  try {
    matmul(Tensor({2, 3}), Tensor({4, 2}));
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("[2x3]"), std::string::npos);
    EXPECT_NE(msg.find("[4x2]"), std::string::npos);
  }
}

// Blocked kernel sums in ascending k, like the naive loop, so results agree
// bit for bit at sizes that cross every blocking boundary.
TEST(Gemm, BitIdenticalToNaiveAcrossBlockSizes) {
  Rng rng(2);
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t m = 1 + rng.below(130), n = 1 + rng.below(40), k = 1 + rng.below(600);
    const Tensor a = random_tensor({m, k}, rng), b = random_tensor({k, n}, rng);
    EXPECT_EQ(matmul(a, b), naive_matmul(a, b)) << m << "x" << k << "x" << n;
  }
}

TEST(Gemm, TransposeFlagsAndAccumulate) {
  Rng rng(3);
  const Tensor a = random_tensor({7, 5}, rng), b = random_tensor({9, 7}, rng);
  // C = A^T B^T : [5x7][7x9]
  Tensor c({5, 9}, 1.0);
  gemm(Trans::kYes, Trans::kYes, 5, 9, 7, a.data().data(), 5, b.data().data(), 7, 1.0, c.data().data(), 9);
  Tensor want = naive_matmul(transpose(a), transpose(b));
  for (double& v : want.data()) v += 1.0;
  EXPECT_LT(max_abs_diff(c, want), 1e-13);
}

TEST(Matmul, AssociativeOnRandomTriples) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = 1 + rng.below(12), k = 1 + rng.below(12), j = 1 + rng.below(12), n = 1 + rng.below(12);
    const Tensor a = random_tensor({m, k}, rng), b = random_tensor({k, j}, rng), c = random_tensor({j, n}, rng);
    const Tensor left = matmul(matmul(a, b), c), right = matmul(a, matmul(b, c));
    double scale = 0.0;
    for (double v : left.data()) scale = std::max(scale, std::abs(v));
    EXPECT_LE(max_abs_diff(left, right), 1e-9 * std::max(scale, 1.0));
  }
}

TEST(Matmul, InputsAreNotMutated) {
  Rng rng(5);
  const Tensor a = random_tensor({4, 6}, rng), b = random_tensor({6, 3}, rng);
  const Tensor a0 = a, b0 = b;
  matmul(a, b);
  EXPECT_EQ(a, a0);
  EXPECT_EQ(b, b0);
}

TEST(Eigh, Identity) {
  const EighResult r = eigh_symmetric(Tensor::identity(4));
  for (double l : r.eigenvalues) EXPECT_EQ(l, 1.0);
  EXPECT_EQ(r.eigenvectors, Tensor::identity(4));
}

TEST(Eigh, TwoByTwoCharacteristicPolynomial) {
  const EighResult r = eigh_symmetric(Tensor::matrix({{2, 1}, {1, 2}}));
  EXPECT_NEAR(r.eigenvalues[0], 3.0, 1e-14);
  EXPECT_NEAR(r.eigenvalues[1], 1.0, 1e-14);
  EXPECT_NEAR(std::abs(r.eigenvectors(0, 0)), std::sqrt(0.5), 1e-14);
}

TEST(Eigh, DiagonalGivesSortedPermutation) {
  Tensor d({3, 3});
  d(0, 0) = 5;
  d(1, 1) = 2;
  d(2, 2) = 9;
  const EighResult r = eigh_symmetric(d);
  EXPECT_EQ(r.eigenvalues, (std::vector<double>{9, 5, 2}));
  EXPECT_EQ(std::abs(r.eigenvectors(2, 0)), 1.0);
  EXPECT_EQ(std::abs(r.eigenvectors(0, 1)), 1.0);
  EXPECT_EQ(std::abs(r.eigenvectors(1, 2)), 1.0);
}

TEST(Eigh, RejectsAsymmetricAndNonSquare) {
  EXPECT_THROW(eigh_symmetric(Tensor::matrix({{1, 2}, {0, 1}})), ArgumentError);
  EXPECT_THROW(eigh_symmetric(Tensor({2, 3})), ArgumentError);
}

// Property: orthonormal eigenvectors, small residuals, exact-ish
// reconstruction, descending order, for random sizes up to 64.
TEST(Eigh, RandomSymmetricProperties) {
  Rng rng(6);
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t n = 1 + rng.below(64);
    const Tensor a = random_symmetric(n, rng);
    const EighResult r = eigh_symmetric(a);
    const Tensor& v = r.eigenvectors;
    const Tensor vtv = matmul(transpose(v), v);
    EXPECT_LT(max_abs_diff(vtv, Tensor::identity(n)), 1e-9) << "n=" << n;
    double lmax = 1.0;
    for (double l : r.eigenvalues) lmax = std::max(lmax, std::abs(l));
    for (std::size_t i = 0; i < n; ++i) {
      if (i > 0) {
        EXPECT_GE(r.eigenvalues[i - 1], r.eigenvalues[i]);
      }
      double resid = 0.0;
      for (std::size_t row = 0; row < n; ++row) {
        double av = 0.0;
        for (std::size_t k = 0; k < n; ++k) av += a(row, k) * v(k, i);
        resid = std::max(resid, std::abs(av - r.eigenvalues[i] * v(row, i)));
      }
      EXPECT_LT(resid, 1e-8 * lmax) << "n=" << n << " i=" << i;
    }
    Tensor vl = v;
    for (std::size_t row = 0; row < n; ++row)
      for (std::size_t i = 0; i < n; ++i) vl(row, i) *= r.eigenvalues[i];
    EXPECT_LT(max_abs_diff(matmul(vl, transpose(v)), a), 1e-8) << "n=" << n;
  }
}

}  // namespace
}  // namespace nforge
