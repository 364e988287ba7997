#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nforge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Dataset location shared by eval, features and augment-preview.
struct DataArgs {
  std::string images;
  std::string labels;
  std::string pnm_dir;
  int classes = 10;
};

struct ConvertArgs {
  std::string input_dir;
  std::string format = "pnm";
  std::string out_prefix;
  int classes = 10;
};

/// Command-line overrides; unset fields leave the file/default value.
struct TrainArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch_size;
  std::optional<std::string> topology;
  std::optional<std::string> activation;
  std::optional<std::string> out;
  bool no_augment = false;
  std::vector<std::string> sets;  // key=value
};

struct EvalArgs {
  std::string checkpoint;
  DataArgs data;
  std::string split = "all";
  std::uint64_t seed = 1;
  std::size_t train_count = 2500;
  std::string dump_dir;
};

struct FeaturesArgs {
  DataArgs data;
  double threshold = 0.5;
  bool invert = true;
  std::string out;  // empty: stdout
};

struct PreviewArgs {
  TrainArgs run;
  std::size_t count = 5;
  std::string out_dir;
};

struct GradcheckArgs {
  std::size_t trials = 20;
  std::uint64_t seed = 1;
  std::optional<std::string> corrupt;  // activation whose derivative is scaled
  double corrupt_factor = 1.01;
};

// Each returns a process exit code; library exceptions are mapped by the caller.
int cmd_convert(const ConvertArgs& a);
int cmd_train(const TrainArgs& a);
int cmd_eval(const EvalArgs& a);
int cmd_features(const FeaturesArgs& a);
int cmd_augment_preview(const PreviewArgs& a);
int cmd_gradcheck(const GradcheckArgs& a);

}  // namespace nforge::cli
