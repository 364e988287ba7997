#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "nforge/augment.hpp"
#include "nforge/network.hpp"

namespace nforge {

/// How raw dataset images become network inputs.
struct Preprocess {
  bool invert = true;
  bool grayscale = true;
  /// Replace images by the 88 shadow/octant features at this threshold.
  std::optional<double> features_threshold;
  /// Whitening fitted on the training split.
  std::optional<ZcaTransform> zca;

};

struct Model {
  Network net;
  Preprocess prep;
};

inline constexpr char kCheckpointMagic[8] = {'N', 'F', 'O', 'R', 'G', 'E', '1', '\0'};

/// Layout: 8-byte magic "NFORGE1\0"; u64 big-endian length of a text block
/// (preprocessing lines "prep <key> <value>" followed by the network spec
/// text); every parameter as a big-endian IEEE-754 double in layer order
/// (weights then bias); when whitening is present, its mean (D) and matrix
/// (D x D) in the same encoding.
void save_checkpoint(const std::filesystem::path& path, const Network& net, const Preprocess& prep);
/// Throws FormatError on bad magic, truncation or trailing bytes; IoError when unreadable.
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace nforge
