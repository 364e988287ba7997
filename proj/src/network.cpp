#include "nforge/network.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nforge/errors.hpp"

namespace nforge {

LayerSpec LayerSpec::conv(std::size_t filters, std::size_t kernel) {
  LayerSpec s;
  s.kind = LayerKind::kConv;
  s.units = filters;
  s.kernel = kernel;
  return s;
}

LayerSpec LayerSpec::maxpool(std::size_t size) {
  LayerSpec s;
  s.kind = LayerKind::kMaxPool;
  s.kernel = size;
  return s;
}

LayerSpec LayerSpec::flatten() {
  LayerSpec s;
  s.kind = LayerKind::kFlatten;
  return s;
}

LayerSpec LayerSpec::dense(std::size_t outputs) {
  LayerSpec s;
  s.kind = LayerKind::kDense;
  s.units = outputs;
  return s;
}

LayerSpec LayerSpec::dropout(double rate) {
  LayerSpec s;
  s.kind = LayerKind::kDropout;
  s.rate = rate;
  return s;
}

LayerSpec LayerSpec::act(ActivationKind kind, double alpha) {
  LayerSpec s;
  s.kind = LayerKind::kActivation;
  s.activation = kind;
  s.alpha = alpha;
  return s;
}

namespace {

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::vector<Shape> chain_shapes(const NetworkSpec& spec) {
  if (spec.input.empty()) throw ShapeError("network input shape is empty");
  std::vector<Shape> shapes{spec.input};
  for (const auto& l : spec.layers) {
    const Shape& in = shapes.back();
    Shape out;
    switch (l.kind) {
      case LayerKind::kConv:
        if (l.units == 0 || l.kernel == 0) throw ShapeError("conv needs filters and kernel > 0");
        out = ConvLayer(in.size() == 3 ? in[0] : 1, l.units, l.kernel).output_shape(in);
        break;
      case LayerKind::kMaxPool:
        if (l.kernel == 0) throw ShapeError("maxpool size must be > 0");
        out = MaxPoolLayer(l.kernel).output_shape(in);
        break;
      case LayerKind::kFlatten:
        out = {shape_size(in)};
        break;
      case LayerKind::kDense:
        if (l.units == 0) throw ShapeError("dense needs outputs > 0");
        if (in.size() != 1)
          throw ShapeError("dense: input " + shape_str(in) + " must be flat (flatten first)");
        out = {l.units};
        break;
      case LayerKind::kDropout:
        if (!(l.rate >= 0.0 && l.rate < 1.0)) throw ArgumentError("dropout rate must lie in [0, 1)");
        out = in;
        break;
      case LayerKind::kActivation:
        if (l.activation == ActivationKind::kElu && !(l.alpha > 0.0))
          throw ArgumentError("ELU alpha must be > 0");
        out = in;
        break;
    }
    shapes.push_back(std::move(out));
  }
  return shapes;
}

}  // namespace

std::vector<Shape> infer_shapes(const NetworkSpec& spec) {
  auto shapes = chain_shapes(spec);
  if (shapes.back() != Shape{spec.classes})
    throw ShapeError("network output " + shape_str(shapes.back()) + " must be [" +
                     std::to_string(spec.classes) + "]");
  return shapes;
}

std::string NetworkSpec::to_text() const {
  std::ostringstream os;
  os << "input";
  for (auto d : input) os << ' ' << d;
  os << '\n';
  for (const auto& l : layers) {
    switch (l.kind) {
      case LayerKind::kConv: os << "conv " << l.units << ' ' << l.kernel; break;
      case LayerKind::kMaxPool: os << "maxpool " << l.kernel; break;
      case LayerKind::kFlatten: os << "flatten"; break;
      case LayerKind::kDense: os << "dense " << l.units; break;
      case LayerKind::kDropout: os << "dropout " << format_double(l.rate); break;
      case LayerKind::kActivation:
        os << "act " << activation_name(l.activation) << ' ' << format_double(l.alpha);
        break;
    }
    os << '\n';
  }
  os << "softmax\n";
  return os.str();
}

NetworkSpec NetworkSpec::from_text(const std::string& text) {
  NetworkSpec spec;
  std::istringstream in(text);
  std::string line;
  bool saw_softmax = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;
    auto fail = [&](const std::string& why) {
      return FormatError("network spec line " + std::to_string(lineno) + ": " + why);
    };
    if (saw_softmax) throw fail("layers after softmax");
    if (word == "input") {
      std::size_t d;
      while (ls >> d) spec.input.push_back(d);
      if (spec.input.empty()) throw fail("input needs extents");
      continue;
    }
    if (spec.input.empty()) throw fail("first line must be 'input'");
    LayerSpec l;
    if (word == "conv") {
      if (!(ls >> l.units >> l.kernel)) throw fail("conv <filters> <kernel>");
      l.kind = LayerKind::kConv;
    } else if (word == "maxpool") {
      if (!(ls >> l.kernel)) throw fail("maxpool <size>");
      l.kind = LayerKind::kMaxPool;
    } else if (word == "flatten") {
      l.kind = LayerKind::kFlatten;
    } else if (word == "dense") {
      if (!(ls >> l.units)) throw fail("dense <outputs>");
      l.kind = LayerKind::kDense;
    } else if (word == "dropout") {
      if (!(ls >> l.rate)) throw fail("dropout <rate>");
      l.kind = LayerKind::kDropout;
    } else if (word == "act") {
      std::string name;
      if (!(ls >> name >> l.alpha)) throw fail("act <kind> <alpha>");
      try {
        l.activation = parse_activation(name);
      } catch (const ArgumentError& e) {
        throw fail(e.what());
      }
      l.kind = LayerKind::kActivation;
    } else if (word == "softmax") {
      saw_softmax = true;
      continue;
    } else {
      throw fail("unknown layer '" + word + "'");
    }
    spec.layers.push_back(l);
  }
  if (spec.input.empty()) throw FormatError("network spec: missing input line");
  if (!saw_softmax) throw FormatError("network spec: missing softmax output");
  try {
    const auto shapes = chain_shapes(spec);
    if (shapes.back().size() != 1) throw ShapeError("output must be flat");
    spec.classes = shapes.back()[0];
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("network spec: ") + e.what());
  }
  return spec;
}

NetworkSpec cnn_topology(Shape input, ActivationKind act, const CnnWidths& widths, double dropout,
                         std::size_t classes) {
  NetworkSpec s{std::move(input), {}, classes};
  for (auto f : widths.conv) {
    s.layers.push_back(LayerSpec::conv(f, 3));
    s.layers.push_back(LayerSpec::act(act));
  }
  s.layers.push_back(LayerSpec::maxpool(2));
  s.layers.push_back(LayerSpec::dropout(dropout));
  s.layers.push_back(LayerSpec::flatten());
  for (auto u : widths.dense) {
    s.layers.push_back(LayerSpec::dense(u));
    s.layers.push_back(LayerSpec::act(act));
    s.layers.push_back(LayerSpec::dropout(dropout));
  }
  s.layers.push_back(LayerSpec::dense(classes));
  infer_shapes(s);
  return s;
}

NetworkSpec mlp_topology(std::size_t inputs, ActivationKind hidden, std::size_t hidden_units,
                         std::size_t classes) {
  NetworkSpec s{{inputs}, {}, classes};
  s.layers = {LayerSpec::dense(hidden_units), LayerSpec::act(hidden), LayerSpec::dense(classes)};
  infer_shapes(s);
  return s;
}

NetworkSpec mlp_raw_topology(Shape input, ActivationKind hidden, std::size_t hidden_units,
                             std::size_t classes) {
  NetworkSpec s{std::move(input), {}, classes};
  s.layers = {LayerSpec::flatten(), LayerSpec::dense(hidden_units), LayerSpec::act(hidden),
              LayerSpec::dense(classes)};
  infer_shapes(s);
  return s;
}

std::size_t param_count(const NetworkSpec& spec) {
  const auto shapes = infer_shapes(spec);
  std::size_t total = 0;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto& l = spec.layers[i];
    const Shape& in = shapes[i];
    if (l.kind == LayerKind::kConv) total += (in[0] * l.kernel * l.kernel + 1) * l.units;
    if (l.kind == LayerKind::kDense) total += (in[0] + 1) * l.units;
  }
  return total;
}

Network::Network(NetworkSpec spec) : spec_(std::move(spec)) {
  const auto shapes = infer_shapes(spec_);
  for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
    const auto& l = spec_.layers[i];
    const Shape& in = shapes[i];
    switch (l.kind) {
      case LayerKind::kConv: layers_.push_back(std::make_unique<ConvLayer>(in[0], l.units, l.kernel)); break;
      case LayerKind::kMaxPool: layers_.push_back(std::make_unique<MaxPoolLayer>(l.kernel)); break;
      case LayerKind::kFlatten: layers_.push_back(std::make_unique<FlattenLayer>()); break;
      case LayerKind::kDense: layers_.push_back(std::make_unique<DenseLayer>(in[0], l.units)); break;
      case LayerKind::kDropout: layers_.push_back(std::make_unique<DropoutLayer>(l.rate)); break;
      case LayerKind::kActivation:
        layers_.push_back(std::make_unique<ActivationLayer>(l.activation, l.alpha));
        break;
    }
  }
  if (!layers_.empty()) layers_.front()->set_need_input_grad(false);
  input_grads_.resize(layers_.size());
}

void Network::init(std::uint64_t seed) {
  Rng rng(seed);
  for (auto& layer : layers_) {
    auto p = layer->params();
    if (p.empty()) continue;
    Tensor& w = p[0];
    double fan_in, fan_out;
    if (layer->kind() == LayerKind::kConv) {
      const double rf = static_cast<double>(w.dim(2) * w.dim(3));
      fan_in = static_cast<double>(w.dim(1)) * rf;
      fan_out = static_cast<double>(w.dim(0)) * rf;
    } else {
      fan_in = static_cast<double>(w.dim(0));
      fan_out = static_cast<double>(w.dim(1));
    }
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& v : w.data()) v = rng.uniform(-limit, limit);
    p[1].fill(0.0);
  }
}

Tensor Network::forward(const Tensor& input, Mode mode, Rng& rng) {
  Shape expect = spec_.input;
  expect.insert(expect.begin(), input.rank() ? input.dim(0) : 0);
  if (input.shape() != expect)
    throw ShapeError("network input " + shape_str(input.shape()) + ", expected [N]+" +
                     shape_str(spec_.input));
  return forward_from(0, input, mode, rng);
}

Tensor Network::forward_from(std::size_t first, const Tensor& input, Mode mode, Rng& rng) {
  Tensor x = input;
  for (std::size_t i = first; i < layers_.size(); ++i) x = layers_[i]->forward(x, mode, rng);
  return x;
}

Tensor Network::backward(const Tensor& grad_logits) {
  Tensor g = grad_logits;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    g = layers_[i]->backward(g);
    if (record_input_grads_) input_grads_[i] = g;
  }
  return g;
}

void Network::set_record_input_grads(bool v) {
  record_input_grads_ = v;
  if (!layers_.empty()) layers_.front()->set_need_input_grad(v);
}

std::vector<Tensor*> Network::params() {
  std::vector<Tensor*> out;
  for (auto& l : layers_)
    for (auto& t : l->params()) out.push_back(&t);
  return out;
}

std::vector<const Tensor*> Network::params() const {
  std::vector<const Tensor*> out;
  for (const auto& l : layers_)
    for (const auto& t : l->params()) out.push_back(&t);
  return out;
}

std::vector<Tensor*> Network::grads() {
  std::vector<Tensor*> out;
  for (auto& l : layers_)
    for (auto& t : l->grads()) out.push_back(&t);
  return out;
}

std::size_t Network::param_count() const {
  std::size_t n = 0;
  for (const Tensor* t : params()) n += t->size();
  return n;
}

Tensor predict_proba(Network& net, const Tensor& input) {
  Rng unused(0);
  return softmax(net.forward(input, Mode::kEval, unused));
}

std::vector<int> argmax_rows(const Tensor& scores) {
  if (scores.rank() != 2) throw ShapeError("argmax_rows: rank-2 scores required");
  std::vector<int> out(scores.dim(0));
  for (std::size_t i = 0; i < scores.dim(0); ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < scores.dim(1); ++j)
      if (scores(i, j) > scores(i, best)) best = j;
    out[i] = static_cast<int>(best);
  }
  return out;
}

}  // namespace nforge
