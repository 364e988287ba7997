#include "nforge/features.hpp"

#include <algorithm>
#include <cstdlib>
#include <vector>

#include "nforge/errors.hpp"

namespace nforge {

namespace {

std::size_t checked_side(const Tensor& image) {
  if (image.rank() != 3 || image.dim(0) != 1 || image.dim(1) != image.dim(2) ||
      image.dim(1) % 2 != 0 || image.dim(1) < 2)
    throw ShapeError("features: expected 1xSxS image with even S, got " + shape_str(image.shape()));
  return image.dim(1);
}

}  // namespace

unsigned octant_mask(std::size_t row, std::size_t col, std::size_t side) {
  // Doubled offsets are odd integers, so comparisons are exact.
  const long s = static_cast<long>(side);
  const long dx = 2 * static_cast<long>(col) + 1 - s;
  const long dy = s - (2 * static_cast<long>(row) + 1);
  const long ax = std::labs(dx), ay = std::labs(dy);
  unsigned mask = 0;
  auto set = [&](int o) { mask |= 1u << o; };
  if (dx > 0 && dy > 0) {
    if (ay <= ax) set(0);
    if (ax <= ay) set(1);
  } else if (dx < 0 && dy > 0) {
    if (ax <= ay) set(2);
    if (ay <= ax) set(3);
  } else if (dx < 0 && dy < 0) {
    if (ay <= ax) set(4);
    if (ax <= ay) set(5);
  } else {
    if (ax <= ay) set(6);
    if (ay <= ax) set(7);
  }
  return mask;
}

ShadowVector shadow_features(const Tensor& image, double threshold) {
  const std::size_t side = checked_side(image);
  const std::size_t half = side / 2;
  // Segment parameters in sixths of a pixel: each third is exactly `side` units.
  const std::size_t units = half * 6;
  std::vector<char> covered(8 * 3 * units, 0);
  auto mark = [&](std::size_t octant, std::size_t segment, long centre6) {
    char* seg = &covered[(octant * 3 + segment) * units];
    const long lo = std::max(0L, centre6 - 3);
    const long hi = std::min(static_cast<long>(units), centre6 + 3);
    for (long i = lo; i < hi; ++i) seg[i] = 1;
  };

  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      if (!(image[r * side + c] >= threshold)) continue;
      const long dx2 = std::labs(2 * static_cast<long>(c) + 1 - static_cast<long>(side));
      const long dy2 = std::labs(static_cast<long>(side) - (2 * static_cast<long>(r) + 1));
      const long u2 = std::max(dx2, dy2), v2 = std::min(dx2, dy2);  // doubled u, v
      const unsigned mask = octant_mask(r, c, side);
      for (std::size_t o = 0; o < 8; ++o) {
        if (!(mask & (1u << o))) continue;
        mark(o, 0, u2 * 3);                // u in sixths
        mark(o, 1, (u2 + v2) * 3 / 2);     // (u + v) / 2 in sixths
        mark(o, 2, v2 * 3);                // v in sixths
      }
    }
  }

  ShadowVector out{};
  for (std::size_t seg = 0; seg < 8 * 3; ++seg) {
    for (std::size_t part = 0; part < 3; ++part) {
      std::size_t count = 0;
      for (std::size_t i = part * side; i < (part + 1) * side; ++i) count += covered[seg * units + i];
      out[seg * 3 + part] = static_cast<double>(count) / static_cast<double>(side);
    }
  }
  return out;
}

OctantVector octant_features(const Tensor& image, double threshold) {
  const std::size_t side = checked_side(image);
  std::array<double, 8> fr{}, fc{}, ar{}, ac{};
  std::array<std::size_t, 8> fn{}, an{};
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      const unsigned mask = octant_mask(r, c, side);
      const bool fg = image[r * side + c] >= threshold;
      const double y = static_cast<double>(r) + 0.5, x = static_cast<double>(c) + 0.5;
      for (std::size_t o = 0; o < 8; ++o) {
        if (!(mask & (1u << o))) continue;
        ar[o] += y;
        ac[o] += x;
        ++an[o];
        if (fg) {
          fr[o] += y;
          fc[o] += x;
          ++fn[o];
        }
      }
    }
  }
  OctantVector out{};
  const double s = static_cast<double>(side);
  for (std::size_t o = 0; o < 8; ++o) {
    if (fn[o] > 0) {
      out[2 * o] = fr[o] / static_cast<double>(fn[o]) / s;
      out[2 * o + 1] = fc[o] / static_cast<double>(fn[o]) / s;
    } else {
      out[2 * o] = ar[o] / static_cast<double>(an[o]) / s;
      out[2 * o + 1] = ac[o] / static_cast<double>(an[o]) / s;
    }
  }
  return out;
}

FeatureVector extract_88(const Tensor& image, double threshold) {
  const ShadowVector sh = shadow_features(image, threshold);
  const OctantVector oc = octant_features(image, threshold);
  FeatureVector out{};
  std::copy(sh.begin(), sh.end(), out.begin());
  std::copy(oc.begin(), oc.end(), out.begin() + kShadowFeatures);
  return out;
}

}  // namespace nforge
