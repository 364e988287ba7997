#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "nforge/train.hpp"

namespace nforge {

/// Everything a `train` invocation needs. Populated from built-in defaults,
/// then a key=value file, then command-line overrides.
struct RunConfig {
  TrainConfig train;
  std::filesystem::path images;  // IDX pair ...
  std::filesystem::path labels;
  std::filesystem::path pnm_dir;  // ... or a PNM directory
  int class_count = 10;
  std::size_t train_count = 2500;
  std::filesystem::path out_dir = "runs";

  /// Throws ConfigError for unknown keys or unparsable values.
  void set(std::string_view key, std::string_view value);
  /// Every key with its current value, one `key = value` line each, in
  /// schema order. Parsing the result reproduces this config.
  std::string to_text() const;
  /// Cross-field checks: training ranges, exactly one dataset source, and
  /// that the named dataset files exist.
  void validate() const;
};

/// The closed key schema, in to_text() order.
const std::vector<std::string>& config_keys();

/// Lines are `key = value`; `#` starts a comment; blank lines are ignored.
/// Duplicate keys are errors. Relative dataset paths resolve against the
/// file's directory.
void apply_config_text(RunConfig& cfg, std::string_view text, const std::filesystem::path& base = {});
RunConfig load_config(const std::filesystem::path& file);

}  // namespace nforge
