#include <gtest/gtest.h>

#include <bit>

#include "helpers.hpp"
#include "nforge/errors.hpp"
#include "nforge/features.hpp"

namespace nforge {
namespace {

constexpr std::size_t kSide = 32;

Tensor blank() { return Tensor({1, kSide, kSide}); }

TEST(Features, RejectsBadShapes) {
  EXPECT_THROW(extract_88(Tensor({1, 31, 31})), ShapeError);
  EXPECT_THROW(extract_88(Tensor({3, 32, 32})), ShapeError);
  EXPECT_THROW(extract_88(Tensor({1, 32, 30})), ShapeError);
}

TEST(Features, EmptyImageHasNoShadow) {
  for (double v : shadow_features(blank())) EXPECT_EQ(v, 0.0);
}

TEST(Features, FullForegroundSaturates) {
  for (double v : shadow_features(Tensor({1, kSide, kSide}, 1.0))) EXPECT_EQ(v, 1.0);
}

TEST(Features, PixelNextToCentreShadowsFirstThird) {
  // Pixel (15, 15) sits on the diagonal between octants 2 and 3 at u = v = 0.5,
  // so each segment gets a unit shadow in its near-centre part, of length 16/3.
  Tensor img = blank();
  img(0, 15, 15) = 1.0;
  const ShadowVector s = shadow_features(img);
  for (std::size_t oct = 0; oct < 8; ++oct)
    for (std::size_t seg = 0; seg < 3; ++seg)
      for (std::size_t part = 0; part < 3; ++part) {
        const bool lit = (oct == 2 || oct == 3) && part == 0;
        EXPECT_NEAR(s[oct * 9 + seg * 3 + part], lit ? 3.0 / 16.0 : 0.0, 1e-12)
            << oct << " " << seg << " " << part;
      }
}

TEST(Features, OctantMasksCoverEveryPixel) {
  for (std::size_t r = 0; r < kSide; ++r)
    for (std::size_t c = 0; c < kSide; ++c) {
      const unsigned m = octant_mask(r, c, kSide);
      const int bits = std::popcount(m);
      const bool diagonal = r == c || r + c == kSide - 1;
      ASSERT_EQ(bits, diagonal ? 2 : 1) << r << "," << c;
    }
  EXPECT_EQ(octant_mask(15, 20, kSide), 1u << 0);  // right of centre, just above
  EXPECT_EQ(octant_mask(0, 17, kSide), 1u << 1);
  EXPECT_EQ(octant_mask(31, 17, kSide), 1u << 6);
}

TEST(Features, EmptyOctantsReportMirroredGeometricCentres) {
  const OctantVector o = octant_features(blank());
  // Octants 0 and 7 mirror through the horizontal centre line; 0 and 3 through the vertical.
  EXPECT_NEAR(o[0] + o[14], 1.0, 1e-12);
  EXPECT_NEAR(o[1], o[15], 1e-12);
  EXPECT_NEAR(o[0], o[6], 1e-12);
  EXPECT_NEAR(o[1] + o[7], 1.0, 1e-12);
  EXPECT_LT(o[0], 0.5);
  EXPECT_GT(o[1], 0.5);
}

TEST(Features, SinglePixelSetsItsOctantCentroid) {
  Tensor img = blank();
  img(0, 14, 25) = 1.0;
  ASSERT_EQ(octant_mask(14, 25, kSide), 1u);
  const OctantVector o = octant_features(img);
  EXPECT_NEAR(o[0], 14.5 / 32.0, 1e-12);
  EXPECT_NEAR(o[1], 25.5 / 32.0, 1e-12);
  const OctantVector e = octant_features(blank());
  for (std::size_t k = 2; k < 16; ++k) EXPECT_EQ(o[k], e[k]);
}

TEST(Features, TranslationMovesCentroidByShift) {
  Tensor a = blank(), b = blank();
  a(0, 12, 22) = 1.0;
  b(0, 12, 24) = 1.0;
  ASSERT_EQ(octant_mask(12, 22, kSide), octant_mask(12, 24, kSide));
  const OctantVector oa = octant_features(a), ob = octant_features(b);
  EXPECT_NEAR(ob[1] - oa[1], 2.0 / 32.0, 1e-12);
  EXPECT_NEAR(ob[0], oa[0], 1e-12);
}

TEST(Features, RandomImagesGiveBoundedVectorAndShadowIsMonotone) {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor img = blank();
    for (double& v : img.data()) v = rng.bernoulli(0.1) ? 1.0 : 0.0;
    const FeatureVector f = extract_88(img);
    for (double v : f) ASSERT_TRUE(v >= 0.0 && v <= 1.0);
    Tensor more = img;
    for (double& v : more.data())
      if (rng.bernoulli(0.1)) v = 1.0;
    const ShadowVector s0 = shadow_features(img), s1 = shadow_features(more);
    for (std::size_t k = 0; k < kShadowFeatures; ++k) ASSERT_GE(s1[k], s0[k]);
  }
}

TEST(Features, ThresholdSelectsForeground) {
  Tensor img = blank();
  img(0, 15, 15) = 0.4;
  for (double v : shadow_features(img, 0.5)) EXPECT_EQ(v, 0.0);
  EXPECT_GT(shadow_features(img, 0.3)[2 * 9], 0.0);
}

}  // namespace
}  // namespace nforge
