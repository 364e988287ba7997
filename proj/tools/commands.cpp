#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "nforge/activations.hpp"
#include "nforge/checkpoint.hpp"
#include "nforge/config.hpp"
#include "nforge/dataio.hpp"
#include "nforge/errors.hpp"
#include "nforge/features.hpp"
#include "nforge/gradcheck.hpp"
#include "nforge/rng.hpp"
#include "nforge/train.hpp"

namespace nforge::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kReferenceAccuracy = 0.994;
constexpr double kBarAccuracy = 0.974;

Dataset load_data(const DataArgs& d) {
  if (!d.pnm_dir.empty()) {
    if (!d.images.empty() || !d.labels.empty())
      throw ConfigError("give either --images/--labels or --pnm-dir, not both");
    return load_pnm(d.pnm_dir, d.classes);
  }
  if (d.images.empty() || d.labels.empty())
    throw ConfigError("a dataset is required: --images and --labels, or --pnm-dir");
  if (!fs::is_regular_file(d.images)) throw ConfigError("images file not found: " + d.images);
  if (!fs::is_regular_file(d.labels)) throw ConfigError("labels file not found: " + d.labels);
  return load_idx(d.images, d.labels, d.classes);
}

Dataset load_data(const RunConfig& cfg) {
  if (!cfg.pnm_dir.empty()) return load_pnm(cfg.pnm_dir, cfg.class_count);
  return load_idx(cfg.images, cfg.labels, cfg.class_count);
}

RunConfig resolve_config(const TrainArgs& a) {
  RunConfig cfg = a.config.empty() ? RunConfig{} : load_config(a.config);
  for (const std::string& kv : a.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (a.seed) cfg.set("seed", std::to_string(*a.seed));
  if (a.epochs) cfg.set("epochs", std::to_string(*a.epochs));
  if (a.batch_size) cfg.set("batch_size", std::to_string(*a.batch_size));
  if (a.topology) cfg.set("topology", *a.topology);
  if (a.activation) cfg.set("activation", *a.activation);
  if (a.out) cfg.set("out", *a.out);
  if (a.no_augment) cfg.set("augment", "false");
  cfg.validate();
  return cfg;
}

Dataset split_for(const RunConfig& cfg, const Dataset& raw) {
  if (cfg.train_count >= raw.size())
    throw ConfigError("train_count " + std::to_string(cfg.train_count) + " leaves no validation samples (dataset has " +
                      std::to_string(raw.size()) + ")");
  return split(raw, cfg.train_count, cfg.train.seed);
}

fs::path make_run_dir(const fs::path& parent, std::uint64_t seed) {
  fs::create_directories(parent);
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%d-%H%M%S", &tm);
  const std::string base = std::string(stamp) + "-seed" + std::to_string(seed);
  for (int n = 1;; ++n) {
    const fs::path dir = parent / (n == 1 ? base : base + "-" + std::to_string(n));
    if (fs::create_directory(dir)) return dir;
  }
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream f(file, std::ios::trunc);
  if (!f) throw IoError("cannot write " + file.string());
  f << text;
  if (!f) throw IoError("short write to " + file.string());
}

// Whitened preview images are rescaled to [0, 1] for display.
Tensor rescaled(const Tensor& t) {
  const auto [lo, hi] = std::minmax_element(t.data().begin(), t.data().end());
  Tensor out = t;
  const double span = *hi - *lo;
  for (double& v : out.data()) v = span > 0.0 ? (v - *lo) / span : 0.0;
  return out;
}

}  // namespace

int cmd_convert(const ConvertArgs& a) {
  const Dataset ds = load_pnm(a.input_dir, a.classes);
  const fs::path images = a.out_prefix + "-images.idx";
  const fs::path labels = a.out_prefix + "-labels.idx";
  if (!fs::path(a.out_prefix).parent_path().empty()) fs::create_directories(fs::path(a.out_prefix).parent_path());
  write_idx(ds, images, labels);
  std::printf("wrote %zu samples to %s and %s\n", ds.size(), images.c_str(), labels.c_str());
  return kExitOk;
}

int cmd_train(const TrainArgs& a) {
  const RunConfig cfg = resolve_config(a);
  const Dataset data = split_for(cfg, load_data(cfg));
  const fs::path dir = make_run_dir(cfg.out_dir, cfg.train.seed);
  write_text(dir / "config.cfg", cfg.to_text());

  std::ofstream metrics(dir / "metrics.csv");
  std::ofstream timing(dir / "timing.csv");
  if (!metrics || !timing) throw IoError("cannot write metrics in " + dir.string());
  metrics << kMetricsCsvHeader << '\n' << std::flush;
  timing << "epoch,wall_seconds\n" << std::flush;

  TrainHooks hooks;
  hooks.on_epoch = [&](const EpochReport& r) {
    metrics << metrics_csv_line(r) << '\n' << std::flush;
    timing << r.epoch << ',' << r.wall_seconds << '\n' << std::flush;
    std::printf("epoch %zu/%zu loss %.4f train %.4f val %.4f (%.1fs)\n", r.epoch, cfg.train.epochs, r.train_loss,
                r.train_accuracy, r.val_accuracy, r.wall_seconds);
    std::fflush(stdout);
  };
  hooks.on_best = [&](const EpochReport&, const Network& net, const Preprocess& prep) {
    save_checkpoint(dir / "best.ckpt", net, prep);
  };
  hooks.on_interval = [&](const EpochReport& r, const Network& net, const Preprocess& prep) {
    save_checkpoint(dir / ("epoch-" + std::to_string(r.epoch) + ".ckpt"), net, prep);
  };

  const TrainResult res = train(data, cfg.train, hooks);
  save_checkpoint(dir / "final.ckpt", res.model.net, res.model.prep);
  write_text(dir / "confusion.csv", res.final_eval.confusion.to_csv());
  const std::size_t wrong = dump_misclassified(res.final_eval, data, dir / "misclassified");

  const double final_acc = res.history.back().val_accuracy;
  char buf[1024];
  std::snprintf(buf, sizeof buf,
                "topology %s\nactivation %s\naugment %s\nparameters %zu\nepochs %zu\nbatch_size %zu\nseed %llu\n"
                "train_samples %zu\nval_samples %zu\nbest_epoch %zu\nbest_val_accuracy %.4f\n"
                "final_val_accuracy %.4f\nreference_accuracy %.4f\ndistance_to_reference %.4f\n"
                "bar_accuracy %.4f\nbar_met %s\nmisclassified %zu\n",
                std::string(topology_name(cfg.train.topology)).c_str(),
                std::string(activation_name(cfg.train.effective_activation())).c_str(),
                cfg.train.augment ? "on" : "off", res.model.net.param_count(), cfg.train.epochs,
                cfg.train.batch_size, static_cast<unsigned long long>(cfg.train.seed), data.split.train.size(),
                data.split.val.size(), res.best_epoch, res.best_val_accuracy, final_acc, kReferenceAccuracy,
                kReferenceAccuracy - res.best_val_accuracy, kBarAccuracy,
                res.best_val_accuracy >= kBarAccuracy ? "yes" : "no", wrong);
  write_text(dir / "summary.txt", buf);
  std::printf("run directory %s\nbest val accuracy %.4f (epoch %zu), final %.4f\n", dir.c_str(),
              res.best_val_accuracy, res.best_epoch, final_acc);
  return kExitOk;
}

int cmd_eval(const EvalArgs& a) {
  Model model = load_checkpoint(a.checkpoint);
  Dataset raw = load_data(a.data);
  SplitSel which = SplitSel::kAll;
  if (a.split != "all") {
    if (a.train_count >= raw.size()) throw ConfigError("--train-count leaves no validation samples");
    raw = split(raw, a.train_count, a.seed);
    which = a.split == "train" ? SplitSel::kTrain : SplitSel::kVal;
  }
  const Evaluation ev = evaluate(model, raw, which);
  std::printf("samples %zu\naccuracy %.4f\n", ev.confusion.total(), ev.accuracy());
  std::printf("confusion (rows = predicted, columns = true)\n%s", ev.confusion.to_table().c_str());
  if (!a.dump_dir.empty()) {
    const std::size_t n = dump_misclassified(ev, raw, a.dump_dir);
    std::printf("misclassified images written: %zu\n", n);
  }
  return kExitOk;
}

int cmd_features(const FeaturesArgs& a) {
  Preprocess prep;
  prep.invert = a.invert;
  prep.features_threshold = a.threshold;
  const Dataset ds = apply_preprocess(load_data(a.data), prep);
  std::ofstream file;
  if (!a.out.empty()) {
    file.open(a.out, std::ios::trunc);
    if (!file) throw IoError("cannot write " + a.out);
  }
  std::ostream& out = a.out.empty() ? std::cout : file;
  for (std::size_t i = 0; i < kFeatureCount; ++i) out << 'f' << i << ',';
  out << "label\n";
  char buf[32];
  for (const Sample& s : ds.samples) {
    for (double v : s.image.data()) {
      std::snprintf(buf, sizeof buf, "%.6g,", v);
      out << buf;
    }
    out << s.label << '\n';
  }
  if (!out) throw IoError("feature output failed");
  return kExitOk;
}

int cmd_augment_preview(const PreviewArgs& a) {
  const RunConfig cfg = resolve_config(a.run);
  Preprocess prep;
  prep.invert = cfg.train.invert;
  prep.grayscale = cfg.train.grayscale;
  const Dataset data = apply_preprocess(split_for(cfg, load_data(cfg)), prep);
  const AugmentConfig aug = cfg.train.augment ? cfg.train.augment_cfg : AugmentConfig::none();

  std::optional<ZcaTransform> zca;
  if (aug.zca_enabled) {
    std::vector<Tensor> train_images;
    for (std::size_t i : data.split.train) train_images.push_back(data.samples[i].image);
    zca = zca_fit(train_images, aug.zca_epsilon);
  }

  fs::create_directories(a.out_dir);
  const std::size_t n = std::min(a.count, data.split.train.size());
  for (std::size_t k = 0; k < n; ++k) {
    const Sample& s = data.samples[data.split.train[k]];
    Rng rng(derive_seed(cfg.train.seed, 0, k));
    const std::vector<Sample> out = augment_batch(std::span<const Sample>(&s, 1), aug, zca ? &*zca : nullptr, rng);
    const Tensor shown = zca ? rescaled(out[0].image) : out[0].image;
    const std::string stem = std::to_string(k) + "_label" + std::to_string(s.label);
    write_pnm(fs::path(a.out_dir) / ("orig_" + stem + ".pgm"), s.image);
    write_pnm(fs::path(a.out_dir) / ("aug_" + stem + ".pgm"), shown);
  }
  std::printf("wrote %zu pairs to %s\n", n, a.out_dir.c_str());
  return kExitOk;
}

int cmd_gradcheck(const GradcheckArgs& a) {
  if (a.corrupt) testing::corrupt_derivative(parse_activation(*a.corrupt), a.corrupt_factor);
  const GradCheckReport report = grad_check_suite(a.trials, a.seed);
  testing::clear_corruption();
  std::printf("%s", report.to_table().c_str());
  std::printf("max relative error %.3e: %s\n", report.max_error(), report.passed() ? "PASS" : "FAIL");
  return report.passed() ? kExitOk : kExitRuntime;
}

}  // namespace nforge::cli
