#include "nforge/dataio.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <string>

#include "nforge/errors.hpp"
#include "nforge/rng.hpp"

namespace nforge {

namespace fs = std::filesystem;

namespace {

std::vector<unsigned char> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

std::uint32_t read_be32(const std::vector<unsigned char>& buf, std::size_t offset,
                        const fs::path& path) {
  if (offset + 4 > buf.size())
    throw FormatError(path.string() + ": truncated header at byte offset " + std::to_string(offset));
  return (std::uint32_t{buf[offset]} << 24) | (std::uint32_t{buf[offset + 1]} << 16) |
         (std::uint32_t{buf[offset + 2]} << 8) | std::uint32_t{buf[offset + 3]};
}

void put_be32(std::vector<unsigned char>& buf, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) buf.push_back(static_cast<unsigned char>(v >> shift));
}

unsigned char to_byte(double v) {
  return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

Dataset load_idx(const fs::path& images, const fs::path& labels, int class_count) {
  const auto ib = read_file(images);
  const auto lb = read_file(labels);

  const std::uint32_t imagic = read_be32(ib, 0, images);
  if (imagic != kIdxGrayMagic && imagic != kIdxRgbMagic)
    throw FormatError(images.string() + ": bad image magic at byte offset 0");
  const std::uint32_t lmagic = read_be32(lb, 0, labels);
  if (lmagic != kIdxLabelMagic) throw FormatError(labels.string() + ": bad label magic at byte offset 0");

  std::size_t off = 4;
  const std::size_t n = read_be32(ib, off, images);
  off += 4;
  std::size_t channels = 1;
  if (imagic == kIdxRgbMagic) {
    channels = read_be32(ib, off, images);
    off += 4;
    if (channels != 3)
      throw FormatError(images.string() + ": expected 3 channels at byte offset 8, got " +
                        std::to_string(channels));
  }
  const std::size_t rows = read_be32(ib, off, images);
  const std::size_t cols = read_be32(ib, off + 4, images);
  off += 8;
  if (rows == 0 || cols == 0) throw FormatError(images.string() + ": zero image extent");

  const std::size_t nl = read_be32(lb, 4, labels);
  if (n != nl)
    throw FormatError("count mismatch: " + images.string() + " holds " + std::to_string(n) +
                      " images, " + labels.string() + " holds " + std::to_string(nl) + " labels");

  const std::size_t per = channels * rows * cols;
  if (ib.size() < off + n * per)
    throw FormatError(images.string() + ": truncated pixel data at byte offset " +
                      std::to_string(ib.size()) + ", expected " + std::to_string(off + n * per) +
                      " bytes");
  if (lb.size() < 8 + n)
    throw FormatError(labels.string() + ": truncated label data at byte offset " +
                      std::to_string(lb.size()));

  Dataset ds;
  ds.class_count = class_count;
  ds.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = lb[8 + i];
    if (label >= class_count)
      throw FormatError(labels.string() + ": label " + std::to_string(label) + " at byte offset " +
                        std::to_string(8 + i) + " exceeds class count " + std::to_string(class_count));
    std::vector<double> px(per);
    const unsigned char* src = ib.data() + off + i * per;
    for (std::size_t j = 0; j < per; ++j) px[j] = src[j] / 255.0;
    ds.samples.push_back({Tensor({channels, rows, cols}, std::move(px)), label});
  }
  return ds;
}

void write_idx(const Dataset& ds, const fs::path& images, const fs::path& labels) {
  if (ds.samples.empty()) throw ArgumentError("write_idx: empty dataset");
  const Shape& shape = ds.image_shape();
  if (shape.size() != 3 || (shape[0] != 1 && shape[0] != 3))
    throw ShapeError("write_idx: images must be 1xHxW or 3xHxW, got " + shape_str(shape));

  std::vector<unsigned char> ib;
  ib.reserve(20 + ds.size() * shape_size(shape));
  put_be32(ib, shape[0] == 1 ? kIdxGrayMagic : kIdxRgbMagic);
  put_be32(ib, static_cast<std::uint32_t>(ds.size()));
  if (shape[0] == 3) put_be32(ib, 3);
  put_be32(ib, static_cast<std::uint32_t>(shape[1]));
  put_be32(ib, static_cast<std::uint32_t>(shape[2]));
  std::vector<unsigned char> lb;
  put_be32(lb, kIdxLabelMagic);
  put_be32(lb, static_cast<std::uint32_t>(ds.size()));
  for (const auto& s : ds.samples) {
    if (s.image.shape() != shape) throw ShapeError("write_idx: mixed image shapes");
    for (double v : s.image.data()) ib.push_back(to_byte(v));
    lb.push_back(static_cast<unsigned char>(s.label));
  }
  write_file(images, ib);
  write_file(labels, lb);
}

Tensor read_pnm(const fs::path& file) {
  const auto buf = read_file(file);
  std::size_t pos = 0;
  auto fail = [&](const std::string& what) -> FormatError {
    return FormatError(file.string() + ": " + what + " at byte offset " + std::to_string(pos));
  };
  auto skip_space = [&] {
    while (pos < buf.size()) {
      if (buf[pos] == '#') {
        while (pos < buf.size() && buf[pos] != '\n') ++pos;
      } else if (std::isspace(buf[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_uint = [&] {
    skip_space();
    if (pos >= buf.size() || !std::isdigit(buf[pos])) throw fail("expected integer");
    std::size_t v = 0;
    while (pos < buf.size() && std::isdigit(buf[pos])) {
      v = v * 10 + static_cast<std::size_t>(buf[pos] - '0');
      if (v > (1u << 24)) throw fail("header value too large");
      ++pos;
    }
    return v;
  };

  if (buf.size() < 2 || buf[0] != 'P' || (buf[1] != '5' && buf[1] != '6'))
    throw fail("not a binary P5/P6 file");
  const std::size_t channels = buf[1] == '5' ? 1 : 3;
  pos = 2;
  const std::size_t w = read_uint();
  const std::size_t h = read_uint();
  const std::size_t maxval = read_uint();
  if (w == 0 || h == 0) throw fail("zero image extent");
  if (maxval != 255) throw fail("unsupported depth (maxval " + std::to_string(maxval) + ")");
  if (pos >= buf.size() || !std::isspace(buf[pos])) throw fail("missing header terminator");
  ++pos;
  if (buf.size() - pos < w * h * channels) throw fail("truncated pixel data");

  Tensor img({channels, h, w});
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t c = 0; c < channels; ++c)
        img[(c * h + y) * w + x] = buf[pos + (y * w + x) * channels + c] / 255.0;
  return img;
}

void write_pnm(const fs::path& file, const Tensor& image) {
  if (image.rank() != 3 || (image.dim(0) != 1 && image.dim(0) != 3))
    throw ShapeError("write_pnm: expected 1xHxW or 3xHxW, got " + shape_str(image.shape()));
  const std::size_t c = image.dim(0), h = image.dim(1), w = image.dim(2);
  const std::string header =
      (c == 1 ? "P5\n" : "P6\n") + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  std::vector<unsigned char> bytes(header.begin(), header.end());
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t ch = 0; ch < c; ++ch) bytes.push_back(to_byte(image[(ch * h + y) * w + x]));
  write_file(file, bytes);
}

Dataset load_pnm(const fs::path& dir, int class_count) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto ext = entry.path().extension();
    if (entry.is_regular_file() && (ext == ".pgm" || ext == ".ppm")) files.push_back(entry.path());
  }
  if (files.empty()) throw FormatError("empty dataset: no .pgm/.ppm files in " + dir.string());
  std::sort(files.begin(), files.end());

  Dataset ds;
  ds.class_count = class_count;
  for (const auto& f : files) {
    const std::string stem = f.stem().string();
    const auto us = stem.find('_');
    if (us == 0 || us == std::string::npos ||
        !std::all_of(stem.begin(), stem.begin() + static_cast<std::ptrdiff_t>(us),
                     [](unsigned char ch) { return std::isdigit(ch); }))
      throw FormatError(f.string() + ": file name must be <label>_<id>");
    const int label = std::stoi(stem.substr(0, us));
    if (label >= class_count)
      throw FormatError(f.string() + ": label " + std::to_string(label) + " exceeds class count");
    Tensor img = read_pnm(f);
    if (!ds.samples.empty() && img.shape() != ds.image_shape())
      throw FormatError(f.string() + ": shape " + shape_str(img.shape()) + " differs from " +
                        shape_str(ds.image_shape()));
    ds.samples.push_back({std::move(img), label});
  }
  return ds;
}

Dataset invert(const Dataset& ds) {
  Dataset out = ds;
  for (auto& s : out.samples)
    for (double& v : s.image.data()) v = 1.0 - v;
  return out;
}

Dataset split(const Dataset& ds, std::size_t train_count, std::uint64_t seed) {
  if (train_count >= ds.size())
    throw ArgumentError("split: train_count " + std::to_string(train_count) +
                        " must be below sample count " + std::to_string(ds.size()));
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  Dataset out = ds;
  out.split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(train_count));
  out.split.val.assign(order.begin() + static_cast<std::ptrdiff_t>(train_count), order.end());
  return out;
}

Dataset to_grayscale(const Dataset& ds) {
  if (ds.samples.empty() || ds.image_shape()[0] == 1) return ds;
  Dataset out = ds;
  for (auto& s : out.samples) {
    const std::size_t h = s.image.dim(1), w = s.image.dim(2), plane = h * w;
    if (s.image.dim(0) != 3) throw ShapeError("to_grayscale: expected 3 channels");
    Tensor g({1, h, w});
    for (std::size_t i = 0; i < plane; ++i)
      g[i] = 0.299 * s.image[i] + 0.587 * s.image[plane + i] + 0.114 * s.image[2 * plane + i];
    s.image = std::move(g);
  }
  return out;
}

Tensor stack_images(const Dataset& ds, std::span<const std::size_t> indices) {
  if (indices.empty()) throw ArgumentError("stack_images: no indices");
  Shape shape = ds.image_shape();
  const std::size_t per = shape_size(shape);
  shape.insert(shape.begin(), indices.size());
  Tensor out(shape);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto src = ds.samples.at(indices[i]).image.data();
    std::copy(src.begin(), src.end(), out.data().begin() + static_cast<std::ptrdiff_t>(i * per));
  }
  return out;
}

std::vector<int> gather_labels(const Dataset& ds, std::span<const std::size_t> indices) {
  std::vector<int> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(ds.samples.at(i).label);
  return out;
}

BatchIterator::BatchIterator(std::vector<std::size_t> indices, std::size_t batch_size,
                             std::uint64_t seed)
    : indices_(std::move(indices)), batch_size_(batch_size), seed_(seed) {
  if (batch_size_ == 0) throw ArgumentError("batch size must be positive");
  if (indices_.empty()) throw ArgumentError("BatchIterator: no indices");
}

std::size_t BatchIterator::batches_per_epoch() const {
  return (indices_.size() + batch_size_ - 1) / batch_size_;
}

std::vector<std::vector<std::size_t>> BatchIterator::epoch(std::size_t epoch_index) const {
  std::vector<std::size_t> order = indices_;
  Rng rng(derive_seed(seed_, epoch_index, UINT32_MAX));
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<std::vector<std::size_t>> batches;
  batches.reserve(batches_per_epoch());
  for (std::size_t i = 0; i < order.size(); i += batch_size_) {
    const std::size_t end = std::min(order.size(), i + batch_size_);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

}  // namespace nforge
