#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "nforge/activations.hpp"
#include "nforge/rng.hpp"
#include "nforge/tensor.hpp"

namespace nforge {

enum class Mode { kTrain, kEval };

// ---- Stateless operations. Batched tensors lead with the sample axis N. ----

/// Valid cross-correlation, stride 1: [N,C,H,W] * [F,C,k,k] + bias[F] -> [N,F,H-k+1,W-k+1].
Tensor conv2d_forward(const Tensor& input, const Tensor& weights, const Tensor& bias);

struct ConvGrads {
  Tensor input;  // left empty when not requested
  Tensor weights;
  Tensor bias;
};
ConvGrads conv2d_backward(const Tensor& grad_out, const Tensor& input, const Tensor& weights,
                          bool need_input_grad = true);

struct PoolResult {
  Tensor output;
  std::vector<std::size_t> argmax;  // flat input index per output element
};
/// Non-overlapping size x size windows; ties go to the first element in
/// row-major order. Throws ShapeError unless H and W divide by size.
PoolResult maxpool_forward(const Tensor& input, std::size_t size = 2);
Tensor maxpool_backward(const Tensor& grad_out, std::span<const std::size_t> argmax,
                        const Shape& input_shape);

struct DropoutResult {
  Tensor output;
  std::vector<double> mask;  // 0 or 1/(1-rate) per unit; empty when identity
};
/// Inverted dropout. Eval mode and rate 0 are the identity.
/// Throws ArgumentError unless 0 <= rate < 1.
DropoutResult dropout_forward(const Tensor& input, double rate, Mode mode, Rng& rng);
Tensor dropout_backward(const Tensor& grad_out, std::span<const double> mask);

/// [N, ...] -> [N, prod(...)].
Tensor flatten(const Tensor& input);
Tensor unflatten(const Tensor& input, const Shape& sample_shape);

/// x W + b: [N,D] x [D,M] + [M] -> [N,M].
Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias);
struct DenseGrads {
  Tensor input;
  Tensor weights;
  Tensor bias;
};
DenseGrads dense_backward(const Tensor& grad_out, const Tensor& input, const Tensor& weights);

Tensor activation_forward(const Tensor& input, ActivationKind kind, double alpha = 1.0);
Tensor activation_backward(const Tensor& grad_out, const Tensor& input, ActivationKind kind,
                           double alpha = 1.0);

/// Row-wise, max-subtracted.
Tensor softmax(const Tensor& logits);

struct LossValue {
  double loss = 0.0;
  Tensor probabilities;
};
inline constexpr double kProbabilityFloor = 1e-12;
/// -mean log p[label], with p clipped to [1e-12, 1]. Throws ArgumentError
/// for labels outside [0, K).
LossValue cross_entropy(const Tensor& probabilities, std::span<const int> labels);
/// Gradient of mean cross-entropy of softmax(logits) w.r.t. the logits: (p - onehot) / N.
Tensor softmax_cross_entropy_grad(const Tensor& probabilities, std::span<const int> labels);

// ---- Layer objects wrapping the operations with cached state. ----

enum class LayerKind { kConv, kMaxPool, kFlatten, kDense, kDropout, kActivation };

std::string_view layer_kind_name(LayerKind kind);

class Layer {
 public:
  virtual ~Layer() = default;
  virtual LayerKind kind() const = 0;
  /// Per-sample output shape for a per-sample input shape.
  virtual Shape output_shape(const Shape& input) const = 0;
  virtual Tensor forward(const Tensor& input, Mode mode, Rng& rng) = 0;
  /// Requires a preceding forward. Overwrites parameter gradients.
  virtual Tensor backward(const Tensor& grad_out) = 0;
  virtual std::span<Tensor> params() { return {}; }
  virtual std::span<Tensor> grads() { return {}; }
  /// Skip the input gradient (first layer of a network).
  void set_need_input_grad(bool v) { need_input_grad_ = v; }
  /// Input seen by the last forward call.
  virtual const Tensor& cached_input() const = 0;

 protected:
  bool need_input_grad_ = true;
};

class ConvLayer final : public Layer {
 public:
  ConvLayer(std::size_t in_channels, std::size_t out_channels, std::size_t kernel);
  LayerKind kind() const override { return LayerKind::kConv; }
  Shape output_shape(const Shape& input) const override;
  Tensor forward(const Tensor& input, Mode mode, Rng& rng) override;
  Tensor backward(const Tensor& grad_out) override;
  std::span<Tensor> params() override { return params_; }
  std::span<Tensor> grads() override { return grads_; }
  const Tensor& cached_input() const override { return input_; }

 private:
  std::size_t kernel_;
  std::vector<Tensor> params_;  // weights [F,C,k,k], bias [F]
  std::vector<Tensor> grads_;
  Tensor input_;
};

class MaxPoolLayer final : public Layer {
 public:
  explicit MaxPoolLayer(std::size_t size) : size_(size) {}
  LayerKind kind() const override { return LayerKind::kMaxPool; }
  Shape output_shape(const Shape& input) const override;
  Tensor forward(const Tensor& input, Mode mode, Rng& rng) override;
  Tensor backward(const Tensor& grad_out) override;
  const Tensor& cached_input() const override { return input_; }

 private:
  std::size_t size_;
  Tensor input_;
  std::vector<std::size_t> argmax_;
};

class FlattenLayer final : public Layer {
 public:
  LayerKind kind() const override { return LayerKind::kFlatten; }
  Shape output_shape(const Shape& input) const override;
  Tensor forward(const Tensor& input, Mode mode, Rng& rng) override;
  Tensor backward(const Tensor& grad_out) override;
  const Tensor& cached_input() const override { return input_; }

 private:
  Tensor input_;
};

class DenseLayer final : public Layer {
 public:
  DenseLayer(std::size_t in_features, std::size_t out_features);
  LayerKind kind() const override { return LayerKind::kDense; }
  Shape output_shape(const Shape& input) const override;
  Tensor forward(const Tensor& input, Mode mode, Rng& rng) override;
  Tensor backward(const Tensor& grad_out) override;
  std::span<Tensor> params() override { return params_; }
  std::span<Tensor> grads() override { return grads_; }
  const Tensor& cached_input() const override { return input_; }

 private:
  std::vector<Tensor> params_;  // weights [D,M], bias [M]
  std::vector<Tensor> grads_;
  Tensor input_;
};

class DropoutLayer final : public Layer {
 public:
  explicit DropoutLayer(double rate);
  LayerKind kind() const override { return LayerKind::kDropout; }
  Shape output_shape(const Shape& input) const override { return input; }
  Tensor forward(const Tensor& input, Mode mode, Rng& rng) override;
  Tensor backward(const Tensor& grad_out) override;
  const Tensor& cached_input() const override { return input_; }

 private:
  double rate_;
  Tensor input_;
  std::vector<double> mask_;
};

class ActivationLayer final : public Layer {
 public:
  ActivationLayer(ActivationKind kind, double alpha);
  LayerKind kind() const override { return LayerKind::kActivation; }
  ActivationKind activation() const { return act_; }
  Shape output_shape(const Shape& input) const override { return input; }
  Tensor forward(const Tensor& input, Mode mode, Rng& rng) override;
  Tensor backward(const Tensor& grad_out) override;
  const Tensor& cached_input() const override { return input_; }

 private:
  ActivationKind act_;
  double alpha_;
  Tensor input_;
};

}  // namespace nforge
