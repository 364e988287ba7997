#include "nforge/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "nforge/errors.hpp"
#include "nforge/linalg.hpp"

namespace nforge {

void AugmentConfig::validate() const {
  if (!(rotation_deg_max >= 0.0)) throw ArgumentError("rotation bound must be >= 0");
  if (!(shift_frac_max >= 0.0 && shift_frac_max < 1.0))
    throw ArgumentError("shift bound must lie in [0, 1)");
  if (!(zoom_frac_max >= 0.0 && zoom_frac_max < 1.0))
    throw ArgumentError("zoom bound must lie in [0, 1)");
  if (!(zca_epsilon > 0.0)) throw ArgumentError("ZCA epsilon must be > 0");
}

AugmentConfig AugmentConfig::none() {
  AugmentConfig cfg;
  cfg.rotation_deg_max = 0.0;
  cfg.shift_frac_max = 0.0;
  cfg.zoom_frac_max = 0.0;
  cfg.zca_enabled = false;
  return cfg;
}

ZcaTransform zca_fit(std::span<const Tensor> images, double epsilon) {
  if (images.size() < 2) throw ArgumentError("zca_fit: need at least 2 images");
  if (!(epsilon > 0.0)) throw ArgumentError("zca_fit: epsilon must be > 0");
  const Shape shape = images[0].shape();
  const std::size_t d = images[0].size();
  const std::size_t n = images.size();

  std::vector<double> mean(d, 0.0);
  for (const auto& img : images) {
    if (img.shape() != shape)
      throw ShapeError("zca_fit: mixed shapes " + shape_str(shape) + " and " + shape_str(img.shape()));
    for (std::size_t j = 0; j < d; ++j) mean[j] += img[j];
  }
  for (double& m : mean) m /= static_cast<double>(n);

  std::vector<double> centered(n * d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) centered[i * d + j] = images[i][j] - mean[j];

  Tensor cov({d, d});
  gemm(Trans::kYes, Trans::kNo, d, d, n, centered.data(), d, centered.data(), d, 0.0,
       cov.data().data(), d);
  double scale = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < i; ++j) cov(i, j) = cov(j, i);  // exact symmetry
  }
  for (double& v : cov.data()) v /= static_cast<double>(n);
  for (std::size_t i = 0; i < d; ++i) scale = std::max(scale, cov(i, i));

  const EighResult eig = eigh_symmetric(cov, 1e-15 * std::max(scale, 1e-300));

  // W = V diag(s) V^T, built as (V diag(s)) V^T then symmetrized.
  Tensor vs = eig.eigenvectors;
  for (std::size_t col = 0; col < d; ++col) {
    const double s = 1.0 / std::sqrt(std::max(eig.eigenvalues[col], 0.0) + epsilon);
    for (std::size_t row = 0; row < d; ++row) vs(row, col) *= s;
  }
  Tensor w({d, d});
  gemm(Trans::kNo, Trans::kYes, d, d, d, vs.data().data(), d, eig.eigenvectors.data().data(), d,
       0.0, w.data().data(), d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) w(i, j) = w(j, i) = 0.5 * (w(i, j) + w(j, i));

  return {shape, std::move(mean), std::move(w)};
}

Tensor zca_apply(const ZcaTransform& zca, const Tensor& image) {
  if (image.shape() != zca.image_shape)
    throw ShapeError("zca_apply: image " + shape_str(image.shape()) + " vs fitted " +
                     shape_str(zca.image_shape));
  const std::size_t d = zca.dim();
  std::vector<double> centered(d);
  for (std::size_t j = 0; j < d; ++j) centered[j] = image[j] - zca.mean[j];
  Tensor out(image.shape());
  gemm(Trans::kNo, Trans::kNo, d, 1, d, zca.whitening.data().data(), d, centered.data(), 1, 0.0,
       out.data().data(), 1);
  return out;
}

void zca_apply_batch(const ZcaTransform& zca, Tensor& batch) {
  const std::size_t d = zca.dim();
  if (batch.rank() < 2 || batch.size() != batch.dim(0) * d ||
      !std::equal(batch.shape().begin() + 1, batch.shape().end(), zca.image_shape.begin(),
                  zca.image_shape.end()))
    throw ShapeError("zca_apply_batch: batch " + shape_str(batch.shape()) + " vs fitted " +
                     shape_str(zca.image_shape));
  const std::size_t n = batch.dim(0);
  std::vector<double> centered(batch.data().begin(), batch.data().end());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) centered[i * d + j] -= zca.mean[j];
  // Rows times W^T; W is symmetric.
  gemm(Trans::kNo, Trans::kYes, n, d, d, centered.data(), d, zca.whitening.data().data(), d, 0.0,
       batch.data().data(), d);
}

AffineParams sample_affine(const AugmentConfig& cfg, Rng& rng) {
  AffineParams p;
  p.angle_deg = rng.uniform(-cfg.rotation_deg_max, cfg.rotation_deg_max);
  p.shift_x_frac = rng.uniform(-cfg.shift_frac_max, cfg.shift_frac_max);
  p.shift_y_frac = rng.uniform(-cfg.shift_frac_max, cfg.shift_frac_max);
  p.zoom_frac = rng.uniform(-cfg.zoom_frac_max, cfg.zoom_frac_max);
  return p;
}

Tensor apply_affine(const Tensor& image, const AffineParams& p) {
  if (image.rank() != 3 || image.dim(1) < 2 || image.dim(2) < 2)
    throw ShapeError("apply_affine: expected CxHxW with H,W >= 2, got " + shape_str(image.shape()));
  if (p.is_identity()) return image;

  const std::size_t channels = image.dim(0), h = image.dim(1), w = image.dim(2);
  const double cx = (static_cast<double>(w) - 1.0) / 2.0;
  const double cy = (static_cast<double>(h) - 1.0) / 2.0;
  const double tx = p.shift_x_frac * static_cast<double>(w);
  const double ty = p.shift_y_frac * static_cast<double>(h);
  const double theta = p.angle_deg * std::numbers::pi / 180.0;
  const double cs = std::cos(theta), sn = std::sin(theta);
  const double scale = 1.0 + p.zoom_frac;

  auto nearest = [](double v, std::size_t extent) {
    const double r = std::floor(v + 0.5);
    if (r <= 0.0) return std::size_t{0};
    if (r >= static_cast<double>(extent - 1)) return extent - 1;
    return static_cast<std::size_t>(r);
  };

  Tensor out(image.shape());
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double dx = static_cast<double>(x) - cx - tx;
      const double dy = static_cast<double>(y) - cy - ty;
      const std::size_t sx = nearest(cx + scale * (cs * dx + sn * dy), w);
      const std::size_t sy = nearest(cy + scale * (-sn * dx + cs * dy), h);
      for (std::size_t c = 0; c < channels; ++c)
        out[(c * h + y) * w + x] = image[(c * h + sy) * w + sx];
    }
  }
  return out;
}

std::vector<Sample> augment_batch(std::span<const Sample> batch, const AugmentConfig& cfg,
                                  const ZcaTransform* zca, Rng& rng) {
  std::vector<Sample> out(batch.begin(), batch.end());
  if (cfg.affine_enabled())
    for (auto& s : out) s.image = apply_affine(s.image, sample_affine(cfg, rng));
  if (zca)
    for (auto& s : out) s.image = zca_apply(*zca, s.image);
  return out;
}

}  // namespace nforge
