#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "nforge/layers.hpp"

namespace nforge {

struct LayerSpec {
  LayerKind kind = LayerKind::kDense;
  std::size_t units = 0;   // conv filters or dense outputs
  std::size_t kernel = 3;  // conv kernel, or maxpool window
  double rate = 0.25;      // dropout
  ActivationKind activation = ActivationKind::kElu;
  double alpha = 1.0;

  static LayerSpec conv(std::size_t filters, std::size_t kernel = 3);
  static LayerSpec maxpool(std::size_t size = 2);
  static LayerSpec flatten();
  static LayerSpec dense(std::size_t outputs);
  static LayerSpec dropout(double rate = 0.25);
  static LayerSpec act(ActivationKind kind, double alpha = 1.0);

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Declarative network: per-sample input shape, layer list, and whether the
/// logits feed a softmax. The final layer must produce `classes` outputs.
struct NetworkSpec {
  Shape input;
  std::vector<LayerSpec> layers;
  std::size_t classes = 10;

  /// Line-oriented text form, e.g. "input 1 32 32\nconv 32 3\nact elu 1\n...softmax\n".
  std::string to_text() const;
  /// Throws FormatError on malformed text.
  static NetworkSpec from_text(const std::string& text);

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

/// Per-sample shape after each layer; throws ShapeError when the chain
/// breaks or the output is not [classes].
std::vector<Shape> infer_shapes(const NetworkSpec& spec);

/// Conv widths and dense widths of the default CNN.
struct CnnWidths {
  std::vector<std::size_t> conv{16, 16, 32, 32};
  std::vector<std::size_t> dense{900, 900};
};

/// conv-act x4, maxpool, dropout, flatten, (dense-act-dropout) per dense
/// width, dense(classes).
NetworkSpec cnn_topology(Shape input = {1, 32, 32}, ActivationKind act = ActivationKind::kElu,
                         const CnnWidths& widths = {}, double dropout = 0.25,
                         std::size_t classes = 10);
/// inputs -> 54 -> classes.
NetworkSpec mlp_topology(std::size_t inputs, ActivationKind hidden = ActivationKind::kLogistic,
                         std::size_t hidden_units = 54, std::size_t classes = 10);
/// Flattened image -> 54 -> classes.
NetworkSpec mlp_raw_topology(Shape input = {1, 32, 32},
                             ActivationKind hidden = ActivationKind::kLogistic,
                             std::size_t hidden_units = 54, std::size_t classes = 10);

std::size_t param_count(const NetworkSpec& spec);

class Network {
 public:
  /// Validates the shape chain. Parameters start at zero; call init().
  explicit Network(NetworkSpec spec);

  const NetworkSpec& spec() const { return spec_; }
  std::size_t layer_count() const { return layers_.size(); }
  Layer& layer(std::size_t i) { return *layers_.at(i); }
  const Layer& layer(std::size_t i) const { return *layers_.at(i); }

  /// Glorot-uniform weights, zero biases, in layer order.
  void init(std::uint64_t seed);

  /// Input [N, spec.input...] -> logits [N, classes].
  Tensor forward(const Tensor& input, Mode mode, Rng& rng);
  /// Runs layers [first, end) on `input`, which must be what layer `first`
  /// takes. Used by gradient checks.
  Tensor forward_from(std::size_t first, const Tensor& input, Mode mode, Rng& rng);
  /// Back-propagates a logit gradient; fills every layer's parameter
  /// gradients and returns the input gradient (empty unless requested).
  Tensor backward(const Tensor& grad_logits);
  /// Records the gradient entering each layer during backward().
  void set_record_input_grads(bool v);
  const Tensor& recorded_input_grad(std::size_t layer) const { return input_grads_.at(layer); }

  /// Flat views in checkpoint order: per parametric layer, weights then bias.
  std::vector<Tensor*> params();
  std::vector<const Tensor*> params() const;
  std::vector<Tensor*> grads();

  std::size_t param_count() const;

 private:
  NetworkSpec spec_;
  std::vector<std::unique_ptr<Layer>> layers_;
  bool record_input_grads_ = false;
  std::vector<Tensor> input_grads_;
};

/// Softmax probabilities in eval mode for a batch.
Tensor predict_proba(Network& net, const Tensor& input);
/// Argmax per row; ties go to the lower class index.
std::vector<int> argmax_rows(const Tensor& scores);

}  // namespace nforge
