#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "nforge/tensor.hpp"

namespace nforge {

struct Sample {
  Tensor image;  // C x H x W, values in [0, 1]
  int label = 0;
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
};

struct Dataset {
  std::vector<Sample> samples;
  int class_count = 10;
  Split split;

  std::size_t size() const { return samples.size(); }
  const Shape& image_shape() const { return samples.at(0).image.shape(); }
};

inline constexpr std::uint32_t kIdxGrayMagic = 0x00000803;
inline constexpr std::uint32_t kIdxRgbMagic = 0x00000804;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// Reads an IDX image/label pair. Pixel bytes are scaled by 1/255.
/// Throws FormatError (with byte offset) or IoError.
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                 int class_count = 10);

/// Writes the pair load_idx reads; pixels are rounded back to bytes.
void write_idx(const Dataset& ds, const std::filesystem::path& images,
               const std::filesystem::path& labels);

/// Loads every `<label>_<id>.pgm|.ppm` in `dir`, in file-name order.
Dataset load_pnm(const std::filesystem::path& dir, int class_count = 10);

/// Binary P5 (1 channel) or P6 (3 channels) with maxval 255.
Tensor read_pnm(const std::filesystem::path& file);
/// Values are clamped to [0, 1] before quantizing.
void write_pnm(const std::filesystem::path& file, const Tensor& image);

/// Every pixel v becomes 1 - v.
Dataset invert(const Dataset& ds);

/// Seeded shuffle, then the first `train_count` indices train and the rest validate.
Dataset split(const Dataset& ds, std::size_t train_count, std::uint64_t seed);

/// Luminance 0.299 R + 0.587 G + 0.114 B. Single-channel input is returned unchanged.
Dataset to_grayscale(const Dataset& ds);

/// Gathers images into one N x C x H x W tensor.
Tensor stack_images(const Dataset& ds, std::span<const std::size_t> indices);
std::vector<int> gather_labels(const Dataset& ds, std::span<const std::size_t> indices);

/// Shuffled mini-batches over a fixed index set. Each epoch's order is a
/// pure function of (seed, epoch).
class BatchIterator {
 public:
  BatchIterator(std::vector<std::size_t> indices, std::size_t batch_size, std::uint64_t seed);

  std::size_t batch_size() const { return batch_size_; }
  std::size_t batches_per_epoch() const;
  /// Every index exactly once; the last batch may be short but never empty.
  std::vector<std::vector<std::size_t>> epoch(std::size_t epoch_index) const;

 private:
  std::vector<std::size_t> indices_;
  std::size_t batch_size_;
  std::uint64_t seed_;
};

}  // namespace nforge
