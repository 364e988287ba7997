#include <gtest/gtest.h>

#include <algorithm>

#include "nforge/errors.hpp"
#include "nforge/metrics.hpp"

namespace nforge {
namespace {

TEST(Confusion, RowsArePredictedColumnsAreTrue) {
  ConfusionMatrix m(3);
  m.add(2, 0);
  m.add(1, 1);
  m.add(1, 1);
  EXPECT_EQ(m.at(2, 0), 1u);
  EXPECT_EQ(m.at(0, 2), 0u);
  EXPECT_EQ(m.total(), 3u);
  EXPECT_EQ(m.trace(), 2u);
  EXPECT_DOUBLE_EQ(m.accuracy(), 2.0 / 3.0);
  EXPECT_EQ(m.column_sum(0), 1u);
  EXPECT_EQ(m.row_sum(1), 2u);
  EXPECT_EQ(m.to_csv(), "0,0,0\n0,2,0\n1,0,0\n");
}

TEST(Confusion, EmptyHasZeroAccuracyAndBadClassRejected) {
  ConfusionMatrix m(4);
  EXPECT_EQ(m.accuracy(), 0.0);
  EXPECT_THROW(m.add(4, 0), ArgumentError);
  EXPECT_THROW(m.add(0, -1), ArgumentError);
}

TEST(Confusion, FromVectorsMatchesManualAdds) {
  const int pred[] = {0, 1, 2, 2, 1};
  const int truth[] = {0, 2, 2, 1, 1};
  ConfusionMatrix manual(3);
  for (int i = 0; i < 5; ++i) manual.add(pred[i], truth[i]);
  EXPECT_EQ(confusion_from(pred, truth, 3), manual);
  const int short_truth[] = {0};
  EXPECT_THROW(confusion_from(pred, short_truth, 3), ArgumentError);
}

TEST(Confusion, TableHasHeaderAndRows) {
  ConfusionMatrix m(2);
  m.add(0, 0);
  const std::string t = m.to_table();
  EXPECT_NE(t.find('1'), std::string::npos);
  EXPECT_GE(std::count(t.begin(), t.end(), '\n'), 3);
}

}  // namespace
}  // namespace nforge
