#include "nforge/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nforge/errors.hpp"
#include "nforge/linalg.hpp"
#include "nforge/parallel.hpp"

namespace nforge {

namespace {

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank)
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                     shape_str(t.shape()));
}

// col[(c*k + i)*k + j][y*wo + x] = in[c][y+i][x+j]
void im2col(const double* in, std::size_t c, std::size_t h, std::size_t w, std::size_t k,
            double* col) {
  const std::size_t ho = h - k + 1, wo = w - k + 1;
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) {
        double* dst = col + ((ch * k + i) * k + j) * ho * wo;
        for (std::size_t y = 0; y < ho; ++y) {
          const double* src = in + (ch * h + y + i) * w + j;
          std::copy(src, src + wo, dst + y * wo);
        }
      }
}

void col2im_add(const double* col, std::size_t c, std::size_t h, std::size_t w, std::size_t k,
                double* out) {
  const std::size_t ho = h - k + 1, wo = w - k + 1;
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) {
        const double* src = col + ((ch * k + i) * k + j) * ho * wo;
        for (std::size_t y = 0; y < ho; ++y) {
          double* dst = out + (ch * h + y + i) * w + j;
          for (std::size_t x = 0; x < wo; ++x) dst[x] += src[y * wo + x];
        }
      }
}

}  // namespace

Tensor conv2d_forward(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  require_rank(input, 4, "conv2d_forward");
  require_rank(weights, 4, "conv2d_forward");
  const std::size_t n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
  const std::size_t f = weights.dim(0), k = weights.dim(2);
  if (weights.dim(1) != c || weights.dim(3) != k)
    throw ShapeError("conv2d_forward: input " + shape_str(input.shape()) + " vs weights " +
                     shape_str(weights.shape()));
  if (bias.rank() != 1 || bias.dim(0) != f)
    throw ShapeError("conv2d_forward: bias " + shape_str(bias.shape()) + " for " +
                     std::to_string(f) + " filters");
  if (h < k || w < k)
    throw ShapeError("conv2d_forward: input " + shape_str(input.shape()) + " smaller than kernel");
  const std::size_t ho = h - k + 1, wo = w - k + 1, ckk = c * k * k, plane = ho * wo;

  Tensor out({n, f, ho, wo});
  parallel_for(n, [&](std::size_t lo, std::size_t hi) {
    std::vector<double> col(ckk * plane);
    for (std::size_t s = lo; s < hi; ++s) {
      im2col(input.data().data() + s * c * h * w, c, h, w, k, col.data());
      double* y = out.data().data() + s * f * plane;
      for (std::size_t fi = 0; fi < f; ++fi) std::fill(y + fi * plane, y + (fi + 1) * plane, bias[fi]);
      gemm(Trans::kNo, Trans::kNo, f, plane, ckk, weights.data().data(), ckk, col.data(), plane, 1.0,
           y, plane);
    }
  });
  return out;
}

ConvGrads conv2d_backward(const Tensor& grad_out, const Tensor& input, const Tensor& weights,
                          bool need_input_grad) {
  require_rank(grad_out, 4, "conv2d_backward");
  require_rank(input, 4, "conv2d_backward");
  const std::size_t n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
  const std::size_t f = weights.dim(0), k = weights.dim(2);
  if (weights.rank() != 4 || weights.dim(1) != c || h < k || w < k)
    throw ShapeError("conv2d_backward: input " + shape_str(input.shape()) + " vs weights " +
                     shape_str(weights.shape()));
  const std::size_t ho = h - k + 1, wo = w - k + 1, ckk = c * k * k, plane = ho * wo;
  if (grad_out.shape() != Shape{n, f, ho, wo})
    throw ShapeError("conv2d_backward: grad " + shape_str(grad_out.shape()) + " vs expected " +
                     shape_str({n, f, ho, wo}));

  ConvGrads g{need_input_grad ? Tensor(input.shape()) : Tensor(), Tensor(weights.shape()),
              Tensor({f})};
  const double* dy = grad_out.data().data();
  for (std::size_t fi = 0; fi < f; ++fi) {
    double acc = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      const double* p = dy + (s * f + fi) * plane;
      for (std::size_t i = 0; i < plane; ++i) acc += p[i];
    }
    g.bias[fi] = acc;
  }

  std::vector<double> col(ckk * plane);
  std::vector<double> dcol(need_input_grad ? ckk * plane : 0);
  for (std::size_t s = 0; s < n; ++s) {
    const double* dys = dy + s * f * plane;
    im2col(input.data().data() + s * c * h * w, c, h, w, k, col.data());
    gemm(Trans::kNo, Trans::kYes, f, ckk, plane, dys, plane, col.data(), plane, s == 0 ? 0.0 : 1.0,
         g.weights.data().data(), ckk);
    if (need_input_grad) {
      gemm(Trans::kYes, Trans::kNo, ckk, plane, f, weights.data().data(), ckk, dys, plane, 0.0,
           dcol.data(), plane);
      col2im_add(dcol.data(), c, h, w, k, g.input.data().data() + s * c * h * w);
    }
  }
  return g;
}

PoolResult maxpool_forward(const Tensor& input, std::size_t size) {
  require_rank(input, 4, "maxpool_forward");
  const std::size_t n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
  if (size == 0 || h % size != 0 || w % size != 0)
    throw ShapeError("maxpool_forward: extents of " + shape_str(input.shape()) +
                     " not divisible by pool size " + std::to_string(size));
  const std::size_t ho = h / size, wo = w / size;
  PoolResult r{Tensor({n, c, ho, wo}), std::vector<std::size_t>(n * c * ho * wo)};
  std::size_t o = 0;
  for (std::size_t plane = 0; plane < n * c; ++plane) {
    const std::size_t base = plane * h * w;
    for (std::size_t y = 0; y < ho; ++y)
      for (std::size_t x = 0; x < wo; ++x, ++o) {
        std::size_t best = base + (y * size) * w + x * size;
        for (std::size_t i = 0; i < size; ++i)
          for (std::size_t j = 0; j < size; ++j) {
            const std::size_t idx = base + (y * size + i) * w + x * size + j;
            if (input[idx] > input[best]) best = idx;
          }
        r.output[o] = input[best];
        r.argmax[o] = best;
      }
  }
  return r;
}

Tensor maxpool_backward(const Tensor& grad_out, std::span<const std::size_t> argmax,
                        const Shape& input_shape) {
  if (grad_out.size() != argmax.size())
    throw ShapeError("maxpool_backward: " + std::to_string(argmax.size()) + " indices for grad " +
                     shape_str(grad_out.shape()));
  Tensor g(input_shape);
  for (std::size_t i = 0; i < argmax.size(); ++i) g[argmax[i]] += grad_out[i];
  return g;
}

DropoutResult dropout_forward(const Tensor& input, double rate, Mode mode, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ArgumentError("dropout rate must lie in [0, 1)");
  if (mode == Mode::kEval || rate == 0.0) return {input, {}};
  const double keep = 1.0 / (1.0 - rate);
  DropoutResult r{Tensor(input.shape()), std::vector<double>(input.size())};
  for (std::size_t i = 0; i < input.size(); ++i) {
    r.mask[i] = rng.bernoulli(rate) ? 0.0 : keep;
    r.output[i] = input[i] * r.mask[i];
  }
  return r;
}

Tensor dropout_backward(const Tensor& grad_out, std::span<const double> mask) {
  if (mask.empty()) return grad_out;
  if (mask.size() != grad_out.size()) throw ShapeError("dropout_backward: mask size mismatch");
  Tensor g(grad_out.shape());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = grad_out[i] * mask[i];
  return g;
}

Tensor flatten(const Tensor& input) {
  if (input.rank() < 2) throw ShapeError("flatten: expected a batch, got " + shape_str(input.shape()));
  return input.reshaped({input.dim(0), input.size() / input.dim(0)});
}

Tensor unflatten(const Tensor& input, const Shape& sample_shape) {
  Shape s = sample_shape;
  s.insert(s.begin(), input.dim(0));
  return input.reshaped(s);
}

Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  require_rank(input, 2, "dense_forward");
  if (weights.rank() != 2 || weights.dim(0) != input.dim(1) || bias.rank() != 1 ||
      bias.dim(0) != weights.dim(1))
    throw ShapeError("dense_forward: input " + shape_str(input.shape()) + ", weights " +
                     shape_str(weights.shape()) + ", bias " + shape_str(bias.shape()));
  const std::size_t n = input.dim(0), d = input.dim(1), m = weights.dim(1);
  Tensor out({n, m});
  for (std::size_t i = 0; i < n; ++i) std::copy(bias.data().begin(), bias.data().end(), &out(i, 0));
  gemm(Trans::kNo, Trans::kNo, n, m, d, input.data().data(), d, weights.data().data(), m, 1.0,
       out.data().data(), m);
  return out;
}

DenseGrads dense_backward(const Tensor& grad_out, const Tensor& input, const Tensor& weights) {
  require_rank(input, 2, "dense_backward");
  const std::size_t n = input.dim(0), d = input.dim(1), m = weights.dim(1);
  if (weights.rank() != 2 || weights.dim(0) != d || grad_out.shape() != Shape{n, m})
    throw ShapeError("dense_backward: grad " + shape_str(grad_out.shape()) + ", input " +
                     shape_str(input.shape()) + ", weights " + shape_str(weights.shape()));
  DenseGrads g{Tensor({n, d}), Tensor({d, m}), Tensor({m})};
  gemm(Trans::kNo, Trans::kYes, n, d, m, grad_out.data().data(), m, weights.data().data(), m, 0.0,
       g.input.data().data(), d);
  gemm(Trans::kYes, Trans::kNo, d, m, n, input.data().data(), d, grad_out.data().data(), m, 0.0,
       g.weights.data().data(), m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) g.bias[j] += grad_out(i, j);
  return g;
}

Tensor activation_forward(const Tensor& input, ActivationKind kind, double alpha) {
  Tensor out(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) out[i] = activate(kind, input[i], alpha);
  return out;
}

Tensor activation_backward(const Tensor& grad_out, const Tensor& input, ActivationKind kind,
                           double alpha) {
  if (grad_out.shape() != input.shape())
    throw ShapeError("activation_backward: grad " + shape_str(grad_out.shape()) + " vs input " +
                     shape_str(input.shape()));
  const double factor = testing::derivative_factor(kind);
  Tensor g(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i)
    g[i] = grad_out[i] * activate_prime(kind, input[i], alpha) * factor;
  return g;
}

Tensor softmax(const Tensor& logits) {
  require_rank(logits, 2, "softmax");
  const std::size_t n = logits.dim(0), k = logits.dim(1);
  Tensor p(logits.shape());
  for (std::size_t i = 0; i < n; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < k; ++j) mx = std::max(mx, logits(i, j));
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) sum += (p(i, j) = std::exp(logits(i, j) - mx));
    for (std::size_t j = 0; j < k; ++j) p(i, j) /= sum;
  }
  return p;
}

namespace {
void check_labels(const Tensor& probs, std::span<const int> labels, const char* op) {
  require_rank(probs, 2, op);
  if (labels.size() != probs.dim(0))
    throw ShapeError(std::string(op) + ": " + std::to_string(labels.size()) + " labels for " +
                     shape_str(probs.shape()));
  for (int l : labels)
    if (l < 0 || static_cast<std::size_t>(l) >= probs.dim(1))
      throw ArgumentError(std::string(op) + ": label " + std::to_string(l) + " outside [0, " +
                          std::to_string(probs.dim(1)) + ")");
}
}  // namespace

LossValue cross_entropy(const Tensor& probabilities, std::span<const int> labels) {
  check_labels(probabilities, labels, "cross_entropy");
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    total -= std::log(std::clamp(probabilities(i, static_cast<std::size_t>(labels[i])),
                                 kProbabilityFloor, 1.0));
  return {total / static_cast<double>(labels.size()), probabilities};
}

Tensor softmax_cross_entropy_grad(const Tensor& probabilities, std::span<const int> labels) {
  check_labels(probabilities, labels, "softmax_cross_entropy_grad");
  const double inv_n = 1.0 / static_cast<double>(labels.size());
  Tensor g = probabilities;
  for (std::size_t i = 0; i < labels.size(); ++i) g(i, static_cast<std::size_t>(labels[i])) -= 1.0;
  for (double& v : g.data()) v *= inv_n;
  return g;
}

std::string_view layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv: return "conv";
    case LayerKind::kMaxPool: return "maxpool";
    case LayerKind::kFlatten: return "flatten";
    case LayerKind::kDense: return "dense";
    case LayerKind::kDropout: return "dropout";
    case LayerKind::kActivation: return "act";
  }
  return "?";
}

// ---- layers ----

ConvLayer::ConvLayer(std::size_t in_channels, std::size_t out_channels, std::size_t kernel)
    : kernel_(kernel),
      params_{Tensor({out_channels, in_channels, kernel, kernel}), Tensor({out_channels})},
      grads_{Tensor({out_channels, in_channels, kernel, kernel}), Tensor({out_channels})} {}

Shape ConvLayer::output_shape(const Shape& in) const {
  if (in.size() != 3 || in[0] != params_[0].dim(1) || in[1] < kernel_ || in[2] < kernel_)
    throw ShapeError("conv: input " + shape_str(in) + " incompatible with weights " +
                     shape_str(params_[0].shape()));
  return {params_[0].dim(0), in[1] - kernel_ + 1, in[2] - kernel_ + 1};
}

Tensor ConvLayer::forward(const Tensor& input, Mode, Rng&) {
  input_ = input;
  return conv2d_forward(input, params_[0], params_[1]);
}

Tensor ConvLayer::backward(const Tensor& grad_out) {
  ConvGrads g = conv2d_backward(grad_out, input_, params_[0], need_input_grad_);
  grads_[0] = std::move(g.weights);
  grads_[1] = std::move(g.bias);
  return std::move(g.input);
}

Shape MaxPoolLayer::output_shape(const Shape& in) const {
  if (in.size() != 3 || in[1] % size_ != 0 || in[2] % size_ != 0)
    throw ShapeError("maxpool: input " + shape_str(in) + " not divisible by " + std::to_string(size_));
  return {in[0], in[1] / size_, in[2] / size_};
}

Tensor MaxPoolLayer::forward(const Tensor& input, Mode, Rng&) {
  input_ = input;
  PoolResult r = maxpool_forward(input, size_);
  argmax_ = std::move(r.argmax);
  return std::move(r.output);
}

Tensor MaxPoolLayer::backward(const Tensor& grad_out) {
  return maxpool_backward(grad_out, argmax_, input_.shape());
}

Shape FlattenLayer::output_shape(const Shape& in) const { return {shape_size(in)}; }

Tensor FlattenLayer::forward(const Tensor& input, Mode, Rng&) {
  input_ = input;
  return flatten(input);
}

Tensor FlattenLayer::backward(const Tensor& grad_out) { return grad_out.reshaped(input_.shape()); }

DenseLayer::DenseLayer(std::size_t in_features, std::size_t out_features)
    : params_{Tensor({in_features, out_features}), Tensor({out_features})},
      grads_{Tensor({in_features, out_features}), Tensor({out_features})} {}

Shape DenseLayer::output_shape(const Shape& in) const {
  if (in.size() != 1 || in[0] != params_[0].dim(0))
    throw ShapeError("dense: input " + shape_str(in) + " incompatible with weights " +
                     shape_str(params_[0].shape()) + " (flatten first?)");
  return {params_[0].dim(1)};
}

Tensor DenseLayer::forward(const Tensor& input, Mode, Rng&) {
  input_ = input;
  return dense_forward(input, params_[0], params_[1]);
}

Tensor DenseLayer::backward(const Tensor& grad_out) {
  DenseGrads g = dense_backward(grad_out, input_, params_[0]);
  grads_[0] = std::move(g.weights);
  grads_[1] = std::move(g.bias);
  return std::move(g.input);
}

DropoutLayer::DropoutLayer(double rate) : rate_(rate) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ArgumentError("dropout rate must lie in [0, 1)");
}

Tensor DropoutLayer::forward(const Tensor& input, Mode mode, Rng& rng) {
  input_ = input;
  DropoutResult r = dropout_forward(input, rate_, mode, rng);
  mask_ = std::move(r.mask);
  return std::move(r.output);
}

Tensor DropoutLayer::backward(const Tensor& grad_out) { return dropout_backward(grad_out, mask_); }

ActivationLayer::ActivationLayer(ActivationKind kind, double alpha) : act_(kind), alpha_(alpha) {
  if (kind == ActivationKind::kElu && !(alpha > 0.0)) throw ArgumentError("ELU alpha must be > 0");
}

Tensor ActivationLayer::forward(const Tensor& input, Mode, Rng&) {
  input_ = input;
  return activation_forward(input, act_, alpha_);
}

Tensor ActivationLayer::backward(const Tensor& grad_out) {
  return activation_backward(grad_out, input_, act_, alpha_);
}

}  // namespace nforge
