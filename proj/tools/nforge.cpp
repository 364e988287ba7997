#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <filesystem>

#include "commands.hpp"
#include "nforge/errors.hpp"

namespace cli = nforge::cli;

namespace {

void add_data_options(CLI::App* sub, cli::DataArgs& d) {
  sub->add_option("--images", d.images, "IDX image file");
  sub->add_option("--labels", d.labels, "IDX label file");
  sub->add_option("--pnm-dir", d.pnm_dir, "Directory of <label>_<id>.pgm|ppm files");
  sub->add_option("--classes", d.classes, "Number of classes")->check(CLI::Range(2, 255));
}

void add_run_options(CLI::App* sub, cli::TrainArgs& t) {
  sub->add_option("--config", t.config, "key=value configuration file")->check(CLI::ExistingFile);
  sub->add_option("--seed", t.seed, "Master seed");
  sub->add_option("--epochs", t.epochs, "Training epochs");
  sub->add_option("--batch-size", t.batch_size, "Mini-batch size");
  sub->add_option("--topology", t.topology, "Network family")
      ->check(CLI::IsMember({"cnn", "mlp-features", "mlp-raw"}));
  sub->add_flag("--no-augment", t.no_augment, "Disable augmentation");
  sub->add_option("--activation", t.activation, "Hidden activation")
      ->check(CLI::IsMember({"logistic", "tanh", "arctan", "relu", "elu"}));
  sub->add_option("--out", t.out, "Parent directory for run directories");
  sub->add_option("--set", t.sets, "Override any config key: key=value (repeatable)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nforge: train and evaluate handwritten digit classifiers"};
  app.require_subcommand(1);

  cli::ConvertArgs convert;
  auto* c = app.add_subcommand("convert", "Convert a PNM directory into an IDX image/label pair");
  c->add_option("--input", convert.input_dir, "Directory of <label>_<id>.pgm|ppm files")->required();
  c->add_option("--format", convert.format, "Input format")->check(CLI::IsMember({"pnm"}));
  c->add_option("--out", convert.out_prefix, "Output prefix; writes <prefix>-images.idx and <prefix>-labels.idx")
      ->required();
  c->add_option("--classes", convert.classes, "Number of classes")->check(CLI::Range(2, 255));

  cli::TrainArgs train;
  auto* t = app.add_subcommand("train", "Train a network and write a run directory");
  add_run_options(t, train);

  cli::EvalArgs eval;
  auto* e = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
  e->add_option("--checkpoint", eval.checkpoint, "Checkpoint file")->required();
  add_data_options(e, eval.data);
  e->add_option("--split", eval.split, "Samples to evaluate")->check(CLI::IsMember({"all", "train", "val"}));
  e->add_option("--seed", eval.seed, "Split seed (train/val selection)");
  e->add_option("--train-count", eval.train_count, "Training split size (train/val selection)");
  e->add_option("--dump", eval.dump_dir, "Write misclassified images here");

  cli::FeaturesArgs feats;
  auto* f = app.add_subcommand("features", "Write the 88 shadow/octant features per sample as CSV");
  add_data_options(f, feats.data);
  f->add_option("--threshold", feats.threshold, "Foreground threshold")->check(CLI::Range(0.0, 1.0));
  f->add_flag("!--no-invert", feats.invert, "Use images as stored (light glyph on dark)");
  f->add_option("--out", feats.out, "CSV file (default stdout)");

  cli::PreviewArgs preview;
  auto* p = app.add_subcommand("augment-preview", "Write original/augmented image pairs");
  add_run_options(p, preview.run);
  p->add_option("-n,--count", preview.count, "Number of pairs")->check(CLI::PositiveNumber);
  p->add_option("--dir", preview.out_dir, "Output directory")->required();

  cli::GradcheckArgs grad;
  auto* g = app.add_subcommand("gradcheck", "Finite-difference check of every layer and activation");
  g->add_option("--trials", grad.trials, "Random instances per spec")->check(CLI::PositiveNumber);
  g->add_option("--seed", grad.seed, "Seed");
  g->add_option("--corrupt", grad.corrupt, "Scale one activation's derivative (sensitivity test)")
      ->check(CLI::IsMember({"logistic", "tanh", "arctan", "relu", "elu"}))
      ->group("");
  g->add_option("--corrupt-factor", grad.corrupt_factor, "Scale used by --corrupt")->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? cli::kExitOk : cli::kExitUsage;
  }

  try {
    if (*c) return cli::cmd_convert(convert);
    if (*t) return cli::cmd_train(train);
    if (*e) return cli::cmd_eval(eval);
    if (*f) return cli::cmd_features(feats);
    if (*p) return cli::cmd_augment_preview(preview);
    if (*g) return cli::cmd_gradcheck(grad);
  } catch (const nforge::ConfigError& err) {
    std::fprintf(stderr, "config error: %s\n", err.what());
    return cli::kExitUsage;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return cli::kExitRuntime;
  }
  return cli::kExitUsage;
}
