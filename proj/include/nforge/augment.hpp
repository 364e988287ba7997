#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nforge/dataio.hpp"
#include "nforge/rng.hpp"
#include "nforge/tensor.hpp"

namespace nforge {

struct AugmentConfig {
  double rotation_deg_max = 10.0;
  double shift_frac_max = 0.2;
  double zoom_frac_max = 0.1;
  bool zca_enabled = true;
  double zca_epsilon = 1e-6;
  std::uint64_t seed = 0;

  /// Throws ArgumentError when a bound is out of range.
  void validate() const;
  bool affine_enabled() const {
    return rotation_deg_max > 0.0 || shift_frac_max > 0.0 || zoom_frac_max > 0.0;
  }
  /// All bounds zero and no whitening.
  static AugmentConfig none();
};

/// Whitening fitted on a training set: x -> W (x - mean), with
/// W = V diag((lambda + eps)^-1/2) V^T symmetric.
struct ZcaTransform {
  Shape image_shape;
  std::vector<double> mean;
  Tensor whitening;  // D x D

  std::size_t dim() const { return mean.size(); }
};

struct AffineParams {
  double angle_deg = 0.0;
  double shift_x_frac = 0.0;
  double shift_y_frac = 0.0;
  double zoom_frac = 0.0;

  bool is_identity() const {
    return angle_deg == 0.0 && shift_x_frac == 0.0 && shift_y_frac == 0.0 && zoom_frac == 0.0;
  }
};

/// Needs at least two images of one shape and epsilon > 0.
ZcaTransform zca_fit(std::span<const Tensor> images, double epsilon);
Tensor zca_apply(const ZcaTransform& zca, const Tensor& image);
/// Whitens every row of an N x (image shape) batch in place.
void zca_apply_batch(const ZcaTransform& zca, Tensor& batch);

/// Draws angle, horizontal shift, vertical shift, zoom; each uniform on its
/// symmetric range.
AffineParams sample_affine(const AugmentConfig& cfg, Rng& rng);

/// Rotation, translation and 1/(1+zoom) scaling about the image centre,
/// resampled by inverse mapping with nearest-neighbour lookup. Source
/// coordinates outside the image clamp to the nearest border pixel.
Tensor apply_affine(const Tensor& image, const AffineParams& p);

/// Affine (when enabled) then whitening (when `zca` is given), per sample.
std::vector<Sample> augment_batch(std::span<const Sample> batch, const AugmentConfig& cfg,
                                  const ZcaTransform* zca, Rng& rng);

}  // namespace nforge
