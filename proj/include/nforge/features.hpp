#pragma once

#include <array>
#include <cstddef>

#include "nforge/tensor.hpp"

// Shadow and octant features for the 88-input MLP baseline.
//
// Geometry (normative for this library). The image is a 1 x S x S tensor
// with S even. Pixel (r, c) has centre offset dx = c + 0.5 - S/2,
// dy = S/2 - (r + 0.5) from the image centre. The 8 octants are the closed
// sectors cut by the horizontal and vertical centre lines and the two
// diagonals, numbered counter-clockwise from the +x axis:
//
//   0: 0 < dy <= dx      1: 0 < dx <= dy      2: 0 < -dx <= dy     3: 0 < dy <= -dx
//   4: 0 < -dy <= -dx    5: 0 < -dx <= -dy    6: 0 < dx <= -dy     7: 0 < -dy <= dx
//
// Pixels on a diagonal (|dx| == |dy|) belong to both adjacent octants.
//
// Reflecting an octant onto octant 0 gives canonical coordinates
// u = max(|dx|, |dy|), v = min(|dx|, |dy|). Its three boundary segments,
// each of length S/2 in its own parameter, are
//   axis     (v = 0,   parameter u),
//   diagonal (u = v,   parameter (u + v) / 2),
//   border   (u = S/2, parameter v).
// A foreground pixel casts a unit-length shadow centred on its projection
// onto each segment. Each segment is cut into 3 equal parts and each part
// reports its shadowed length divided by its own length, giving
// 8 octants x 3 segments x 3 parts = 72 values in [0, 1], ordered
// [octant][segment: axis, diagonal, border][part: near centre .. far].
//
// Octant features are the (row, col) centroid of the octant's foreground
// pixel centres divided by S; an empty octant reports the centroid of all
// its pixels. 8 x 2 = 16 values ordered [octant][row, col].

namespace nforge {

inline constexpr std::size_t kShadowFeatures = 72;
inline constexpr std::size_t kOctantFeatures = 16;
inline constexpr std::size_t kFeatureCount = kShadowFeatures + kOctantFeatures;

using ShadowVector = std::array<double, kShadowFeatures>;
using OctantVector = std::array<double, kOctantFeatures>;
using FeatureVector = std::array<double, kFeatureCount>;

/// Foreground is value >= threshold. Throws ShapeError unless 1 x S x S, S even.
ShadowVector shadow_features(const Tensor& image, double threshold = 0.5);
OctantVector octant_features(const Tensor& image, double threshold = 0.5);
/// shadow ++ octant.
FeatureVector extract_88(const Tensor& image, double threshold = 0.5);

/// Octant membership of pixel (row, col) in an S x S image as a bit mask.
unsigned octant_mask(std::size_t row, std::size_t col, std::size_t side);

}  // namespace nforge
