#include <gtest/gtest.h>

#include "helpers.hpp"
#include "nforge/errors.hpp"
#include "nforge/tensor.hpp"

namespace nforge {
namespace {

TEST(Tensor, ShapeAndFill) {
  Tensor t({2, 3}, 1.5);
  EXPECT_EQ(t.rank(), 2u);
  EXPECT_EQ(t.size(), 6u);
  EXPECT_EQ(shape_str(t.shape()), "[2x3]");
  for (double v : t.data()) EXPECT_EQ(v, 1.5);
}

TEST(Tensor, RejectsZeroExtentAndEmptyShape) {
  EXPECT_THROW(Tensor({2, 0}), ShapeError);
  EXPECT_THROW(Tensor(Shape{}), ShapeError);
}

TEST(Tensor, RejectsDataSizeMismatch) {
  EXPECT_THROW(Tensor({2, 2}, std::vector<double>{1, 2, 3}), ShapeError);
}

TEST(Tensor, RowMajorLayout) {
  const Tensor m = Tensor::matrix({{1, 2, 3}, {4, 5, 6}});
  EXPECT_EQ(m(1, 0), 4.0);
  EXPECT_EQ(m[5], 6.0);
}

TEST(Tensor, ReshapeKeepsDataAndChecksCount) {
  const Tensor m = Tensor::matrix({{1, 2}, {3, 4}});
  const Tensor v = m.reshaped({4});
  EXPECT_EQ(v.values(), m.values());
  EXPECT_THROW(m.reshaped({3}), ShapeError);
}

TEST(Tensor, IdentityAndMaxAbsDiff) {
  const Tensor i = Tensor::identity(3);
  EXPECT_EQ(i(0, 0), 1.0);
  EXPECT_EQ(i(0, 1), 0.0);
  Tensor j = i;
  j(2, 1) = -0.5;
  EXPECT_DOUBLE_EQ(max_abs_diff(i, j), 0.5);
  EXPECT_THROW(max_abs_diff(i, Tensor({2, 2})), ShapeError);
}

}  // namespace
}  // namespace nforge
