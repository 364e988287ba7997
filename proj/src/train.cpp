#include "nforge/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <future>
#include <string>

#include "nforge/errors.hpp"
#include "nforge/features.hpp"
#include "nforge/rng.hpp"

namespace nforge {

namespace fs = std::filesystem;

namespace {

// Independent streams drawn from the single run seed.
constexpr std::uint64_t kInitSalt = 0x696e6974ULL;
constexpr std::uint64_t kOrderSalt = 0x6f726472ULL;
constexpr std::uint64_t kAugmentSalt = 0x61756731ULL;
constexpr std::uint64_t kDropoutSalt = 0x64726f70ULL;
constexpr std::size_t kEvalBatch = 250;

struct Batch {
  Tensor x;
  std::vector<int> labels;
};

Tensor stack(std::span<const Tensor> images) {
  Shape shape{images.size()};
  const Shape& s = images.front().shape();
  shape.insert(shape.end(), s.begin(), s.end());
  Tensor out(shape);
  const std::size_t d = images.front().size();
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto src = images[i].data();
    std::copy(src.begin(), src.end(), out.data().begin() + static_cast<std::ptrdiff_t>(i * d));
  }
  return out;
}

}  // namespace

std::string_view topology_name(Topology t) {
  switch (t) {
    case Topology::kCnn: return "cnn";
    case Topology::kMlpFeatures: return "mlp-features";
    case Topology::kMlpRaw: return "mlp-raw";
  }
  return "?";
}

Topology parse_topology(std::string_view name) {
  if (name == "cnn") return Topology::kCnn;
  if (name == "mlp-features") return Topology::kMlpFeatures;
  if (name == "mlp-raw") return Topology::kMlpRaw;
  throw ArgumentError("unknown topology '" + std::string(name) + "' (cnn, mlp-features, mlp-raw)");
}

AugmentConfig TrainConfig::default_augment() {
  AugmentConfig a;
  a.zca_enabled = false;
  return a;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (hidden_units < 1) throw ConfigError("hidden_units must be >= 1");
  if (!(elu_alpha > 0.0)) throw ConfigError("elu_alpha must be > 0");
  if (!(features_threshold > 0.0 && features_threshold <= 1.0))
    throw ConfigError("features_threshold must lie in (0, 1]");
  if (widths.conv.empty()) throw ConfigError("conv_widths must not be empty");
  for (auto w : widths.conv)
    if (w == 0) throw ConfigError("conv widths must be positive");
  for (auto w : widths.dense)
    if (w == 0) throw ConfigError("dense widths must be positive");
  if (!(optimizer.rho > 0.0 && optimizer.rho < 1.0)) throw ConfigError("rho must lie in (0, 1)");
  if (!(optimizer.eps > 0.0)) throw ConfigError("adadelta_eps must be > 0");
  if (!(optimizer.learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  try {
    augment_cfg.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
}

ActivationKind TrainConfig::effective_activation() const {
  if (activation) return *activation;
  return topology == Topology::kCnn ? ActivationKind::kElu : ActivationKind::kLogistic;
}

OptimizerConfig TrainConfig::effective_optimizer() const {
  OptimizerConfig o = optimizer;
  if (optimizer_kind) {
    o.kind = *optimizer_kind;
  } else {
    o.kind = topology == Topology::kCnn ? OptimizerKind::kAdadelta : OptimizerKind::kSgd;
  }
  return o;
}

std::string metrics_csv_line(const EpochReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu,%.6f,%.4f,%.4f,%.3f", r.epoch, r.train_loss, r.train_accuracy,
                r.val_accuracy, r.seconds);
  return buf;
}

Dataset apply_preprocess(const Dataset& raw, const Preprocess& prep) {
  Dataset ds = prep.invert ? invert(raw) : raw;
  if (prep.grayscale) ds = to_grayscale(ds);
  if (prep.features_threshold) {
    for (Sample& s : ds.samples) {
      const FeatureVector f = extract_88(s.image, *prep.features_threshold);
      s.image = Tensor({kFeatureCount}, std::vector<double>(f.begin(), f.end()));
    }
  }
  return ds;
}

NetworkSpec build_spec(const TrainConfig& cfg, const Shape& sample_shape, std::size_t classes) {
  const ActivationKind act = cfg.effective_activation();
  NetworkSpec spec;
  switch (cfg.topology) {
    case Topology::kCnn:
      spec = cnn_topology(sample_shape, act, cfg.widths, cfg.dropout, classes);
      break;
    case Topology::kMlpFeatures:
      spec = mlp_topology(shape_size(sample_shape), act, cfg.hidden_units, classes);
      break;
    case Topology::kMlpRaw:
      spec = mlp_raw_topology(sample_shape, act, cfg.hidden_units, classes);
      break;
  }
  for (LayerSpec& l : spec.layers)
    if (l.kind == LayerKind::kActivation) l.alpha = cfg.elu_alpha;
  return spec;
}

Evaluation evaluate(Network& net, const Dataset& prepared, std::span<const std::size_t> indices,
                    const ZcaTransform* zca) {
  Evaluation ev;
  ev.indices.assign(indices.begin(), indices.end());
  ev.truth = gather_labels(prepared, indices);
  ev.predicted.reserve(indices.size());
  for (std::size_t lo = 0; lo < indices.size(); lo += kEvalBatch) {
    const auto chunk = indices.subspan(lo, std::min(kEvalBatch, indices.size() - lo));
    Tensor x = stack_images(prepared, chunk);
    if (zca) zca_apply_batch(*zca, x);
    const std::vector<int> p = argmax_rows(predict_proba(net, x));
    ev.predicted.insert(ev.predicted.end(), p.begin(), p.end());
  }
  ev.confusion = confusion_from(ev.predicted, ev.truth, static_cast<std::size_t>(prepared.class_count));
  return ev;
}

Evaluation evaluate(Model& model, const Dataset& raw, SplitSel which) {
  const Dataset prepared = apply_preprocess(raw, model.prep);
  const Shape& want = model.net.spec().input;
  if (prepared.size() > 0 && prepared.image_shape() != want)
    throw ShapeError("dataset sample shape " + shape_str(prepared.image_shape()) +
                     " does not match network input " + shape_str(want));
  std::vector<std::size_t> all;
  switch (which) {
    case SplitSel::kTrain: all = raw.split.train; break;
    case SplitSel::kVal: all = raw.split.val; break;
    case SplitSel::kAll:
      for (std::size_t i = 0; i < raw.size(); ++i) all.push_back(i);
      break;
  }
  if (all.empty()) throw ArgumentError("evaluate: selected split is empty");
  return evaluate(model.net, prepared, all, model.prep.zca ? &*model.prep.zca : nullptr);
}

Evaluation evaluate_predictions(std::span<const int> predicted, std::span<const int> truth,
                                std::size_t classes) {
  Evaluation ev;
  ev.predicted.assign(predicted.begin(), predicted.end());
  ev.truth.assign(truth.begin(), truth.end());
  for (std::size_t i = 0; i < truth.size(); ++i) ev.indices.push_back(i);
  ev.confusion = confusion_from(predicted, truth, classes);
  return ev;
}

std::size_t dump_misclassified(const Evaluation& ev, const Dataset& images, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::size_t written = 0;
  for (std::size_t k = 0; k < ev.indices.size(); ++k) {
    if (ev.predicted[k] == ev.truth[k]) continue;
    const std::size_t idx = ev.indices[k];
    const Tensor& img = images.samples.at(idx).image;
    const char* ext = img.rank() == 3 && img.dim(0) == 3 ? ".ppm" : ".pgm";
    const std::string name = "true" + std::to_string(ev.truth[k]) + "_pred" +
                             std::to_string(ev.predicted[k]) + "_" + std::to_string(idx) + ext;
    write_pnm(dir / name, img);
    ++written;
  }
  return written;
}

TrainResult train(const Dataset& raw, const TrainConfig& cfg, const TrainHooks& hooks) {
  cfg.validate();
  if (raw.split.train.empty() || raw.split.val.empty())
    throw ArgumentError("train: dataset needs non-empty train and validation splits");

  Preprocess prep;
  prep.invert = cfg.invert;
  prep.grayscale = cfg.grayscale;
  if (cfg.topology == Topology::kMlpFeatures) prep.features_threshold = cfg.features_threshold;
  const Dataset data = apply_preprocess(raw, prep);
  const Shape sample_shape = data.image_shape();
  const auto classes = static_cast<std::size_t>(data.class_count);

  const bool images_in = cfg.topology != Topology::kMlpFeatures;
  const bool affine = cfg.augment && images_in && cfg.augment_cfg.affine_enabled();
  std::optional<ZcaTransform> zca;
  if (cfg.augment && images_in && cfg.augment_cfg.zca_enabled) {
    std::vector<Tensor> train_images;
    train_images.reserve(data.split.train.size());
    for (std::size_t i : data.split.train) train_images.push_back(data.samples[i].image);
    zca = zca_fit(train_images, cfg.augment_cfg.zca_epsilon);
  }
  Preprocess saved_prep = prep;
  if (zca && cfg.zca_at_eval) saved_prep.zca = zca;
  const ZcaTransform* eval_zca = saved_prep.zca ? &*saved_prep.zca : nullptr;

  // One fixed affine draw per training sample when not refreshed per epoch.
  std::vector<Tensor> fixed_affine;
  if (affine && !cfg.augment_per_epoch) {
    fixed_affine.resize(data.size());
    for (std::size_t i : data.split.train) {
      Rng rng(derive_seed(cfg.seed ^ kAugmentSalt, 0, i));
      fixed_affine[i] = apply_affine(data.samples[i].image, sample_affine(cfg.augment_cfg, rng));
    }
  }

  Network net(build_spec(cfg, sample_shape, classes));
  net.init(mix64(cfg.seed ^ kInitSalt));
  Optimizer opt(cfg.effective_optimizer());
  const BatchIterator batches(data.split.train, cfg.batch_size, cfg.seed ^ kOrderSalt);

  auto make_batch = [&](std::size_t epoch, std::size_t b, const std::vector<std::size_t>& idx) {
    std::vector<Tensor> images;
    images.reserve(idx.size());
    if (affine && cfg.augment_per_epoch) {
      Rng rng(derive_seed(cfg.seed ^ kAugmentSalt, epoch, b));
      for (std::size_t i : idx)
        images.push_back(apply_affine(data.samples[i].image, sample_affine(cfg.augment_cfg, rng)));
    } else {
      for (std::size_t i : idx) images.push_back(affine ? fixed_affine[i] : data.samples[i].image);
    }
    Batch out{stack(images), gather_labels(data, idx)};
    if (zca) zca_apply_batch(*zca, out.x);
    return out;
  };

  TrainResult result{Model{std::move(net), saved_prep}, {}, 0, -1.0, {}};
  Network& model_net = result.model.net;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto order = batches.epoch(epoch);
    double loss_sum = 0.0;
    std::size_t correct = 0, seen = 0;
    std::future<Batch> next = std::async(std::launch::async, make_batch, epoch, 0, std::cref(order[0]));
    for (std::size_t b = 0; b < order.size(); ++b) {
      Batch batch = next.get();
      if (b + 1 < order.size())
        next = std::async(std::launch::async, make_batch, epoch, b + 1, std::cref(order[b + 1]));
      Rng drop(derive_seed(cfg.seed ^ kDropoutSalt, epoch, b));
      const Tensor logits = model_net.forward(batch.x, Mode::kTrain, drop);
      const Tensor probs = softmax(logits);
      const double loss = cross_entropy(probs, batch.labels).loss;
      if (!std::isfinite(loss))
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch + 1) + ", batch " +
                           std::to_string(b + 1));
      const std::size_t n = batch.labels.size();
      loss_sum += loss * static_cast<double>(n);
      const std::vector<int> pred = argmax_rows(probs);
      for (std::size_t i = 0; i < n; ++i) correct += pred[i] == batch.labels[i];
      seen += n;
      model_net.backward(softmax_cross_entropy_grad(probs, batch.labels));
      opt.step(model_net.params(), model_net.grads());
    }

    Evaluation val = evaluate(model_net, data, data.split.val, eval_zca);
    EpochReport r;
    r.epoch = epoch + 1;
    r.train_loss = loss_sum / static_cast<double>(seen);
    r.train_accuracy = static_cast<double>(correct) / static_cast<double>(seen);
    r.val_accuracy = val.accuracy();
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.seconds = cfg.timing ? r.wall_seconds : 0.0;
    result.history.push_back(r);
    if (hooks.on_epoch) hooks.on_epoch(r);
    if (r.val_accuracy > result.best_val_accuracy) {
      result.best_val_accuracy = r.val_accuracy;
      result.best_epoch = r.epoch;
      if (hooks.on_best) hooks.on_best(r, model_net, saved_prep);
    }
    if (cfg.checkpoint_interval > 0 && r.epoch % cfg.checkpoint_interval == 0 && hooks.on_interval)
      hooks.on_interval(r, model_net, saved_prep);
    if (epoch + 1 == cfg.epochs) result.final_eval = std::move(val);
  }
  return result;
}

}  // namespace nforge
