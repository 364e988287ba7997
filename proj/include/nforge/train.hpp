#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nforge/augment.hpp"
#include "nforge/checkpoint.hpp"
#include "nforge/dataio.hpp"
#include "nforge/metrics.hpp"
#include "nforge/network.hpp"
#include "nforge/optim.hpp"

namespace nforge {

enum class Topology { kCnn, kMlpFeatures, kMlpRaw };

std::string_view topology_name(Topology t);
/// Throws ArgumentError for names other than cnn, mlp-features, mlp-raw.
Topology parse_topology(std::string_view name);

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 128;
  std::uint64_t seed = 1;

  Topology topology = Topology::kCnn;
  /// Unset: ELU for the CNN, logistic for the MLPs.
  std::optional<ActivationKind> activation;
  double elu_alpha = 1.0;
  CnnWidths widths;
  double dropout = 0.25;
  std::size_t hidden_units = 54;

  bool invert = true;
  bool grayscale = true;
  double features_threshold = 0.5;

  bool augment = true;
  AugmentConfig augment_cfg = default_augment();
  /// Fresh affine draws every epoch; otherwise one fixed draw per sample.
  bool augment_per_epoch = true;
  /// Also whiten validation and inference inputs.
  bool zca_at_eval = false;

  /// Unset: Adadelta for the CNN, SGD for the MLPs.
  std::optional<OptimizerKind> optimizer_kind;
  /// Hyperparameters; the kind used is effective_optimizer().kind.
  OptimizerConfig optimizer;
  /// Epoch checkpoints every this many epochs; 0 disables them.
  std::size_t checkpoint_interval = 0;
  /// Record wall-clock seconds in EpochReport; zero otherwise.
  bool timing = false;

  /// Throws ConfigError when a field is out of range.
  void validate() const;
  ActivationKind effective_activation() const;
  OptimizerConfig effective_optimizer() const;
  static AugmentConfig default_augment();
};

struct EpochReport {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  double seconds = 0.0;
  double wall_seconds = 0.0;  // always measured
};

/// One `epoch,train_loss,train_acc,val_acc,seconds` line, no newline.
std::string metrics_csv_line(const EpochReport& r);
inline constexpr const char* kMetricsCsvHeader = "epoch,train_loss,train_acc,val_acc,seconds";

/// Raw images turned into network inputs: inversion, grayscale, and for the
/// feature MLP the 88-vector. Whitening is not applied here.
Dataset apply_preprocess(const Dataset& raw, const Preprocess& prep);

/// Architecture for `cfg` on preprocessed samples of `sample_shape`.
NetworkSpec build_spec(const TrainConfig& cfg, const Shape& sample_shape, std::size_t classes);

struct Evaluation {
  std::vector<std::size_t> indices;  // dataset indices, in evaluation order
  std::vector<int> predicted;
  std::vector<int> truth;
  ConfusionMatrix confusion{1};
  double accuracy() const { return confusion.accuracy(); }
};

/// Eval-mode argmax (ties to the lower class) over `indices` of an already
/// preprocessed dataset, whitened with `zca` when given.
Evaluation evaluate(Network& net, const Dataset& prepared, std::span<const std::size_t> indices,
                    const ZcaTransform* zca = nullptr);

enum class SplitSel { kTrain, kVal, kAll };
/// Preprocesses `raw` per the model, then evaluates the selected split.
Evaluation evaluate(Model& model, const Dataset& raw, SplitSel which);

/// Confusion accumulated from precomputed predictions.
Evaluation evaluate_predictions(std::span<const int> predicted, std::span<const int> truth,
                                std::size_t classes);

/// Writes every misclassified sample of `ev` as `true<t>_pred<p>_<idx>.pgm`
/// (`.ppm` for colour images) from `images`. Returns the count written.
std::size_t dump_misclassified(const Evaluation& ev, const Dataset& images,
                               const std::filesystem::path& dir);

struct TrainHooks {
  std::function<void(const EpochReport&)> on_epoch;
  /// Called after an epoch that strictly improves validation accuracy.
  std::function<void(const EpochReport&, const Network&, const Preprocess&)> on_best;
  /// Called every checkpoint_interval epochs.
  std::function<void(const EpochReport&, const Network&, const Preprocess&)> on_interval;
};

struct TrainResult {
  Model model;  // final epoch
  std::vector<EpochReport> history;
  std::size_t best_epoch = 0;
  double best_val_accuracy = 0.0;
  /// Validation evaluation of the final model.
  Evaluation final_eval;
};

/// Trains on ds.split.train and validates on ds.split.val. `raw` holds
/// unprocessed images; preprocessing follows cfg. Deterministic for a
/// fixed cfg (including seed). Throws NumericError naming the epoch and
/// batch when the loss is not finite.
TrainResult train(const Dataset& raw, const TrainConfig& cfg, const TrainHooks& hooks = {});

}  // namespace nforge
