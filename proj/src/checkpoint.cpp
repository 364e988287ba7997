#include "nforge/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <vector>

#include "nforge/errors.hpp"

namespace nforge {

namespace fs = std::filesystem;

namespace {

void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<unsigned char>(v >> shift));
}

void put_f64(std::vector<unsigned char>& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  Reader(std::vector<unsigned char> bytes, std::string name)
      : bytes_(std::move(bytes)), name_(std::move(name)) {}

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | bytes_[pos_++];
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string text(std::size_t n) {
    need(n);
    std::string s(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return s;
  }
  void fill(Tensor& t) {
    need(t.size() * 8);
    for (double& v : t.data()) v = f64();
  }
  bool at_end() const { return pos_ == bytes_.size(); }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n)
      throw FormatError(name_ + ": truncated checkpoint at byte offset " + std::to_string(pos_));
  }
  std::vector<unsigned char> bytes_;
  std::string name_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const fs::path& path, const Network& net, const Preprocess& prep) {
  std::ostringstream header;
  header << "prep invert " << (prep.invert ? 1 : 0) << '\n';
  header << "prep grayscale " << (prep.grayscale ? 1 : 0) << '\n';
  if (prep.features_threshold) {
    std::ostringstream v;
    v.precision(17);
    v << *prep.features_threshold;
    header << "prep features " << v.str() << '\n';
  }
  if (prep.zca) {
    header << "prep zca";
    for (auto d : prep.zca->image_shape) header << ' ' << d;
    header << '\n';
  }
  header << net.spec().to_text();
  const std::string text = header.str();

  std::vector<unsigned char> out(std::begin(kCheckpointMagic), std::end(kCheckpointMagic));
  put_u64(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  for (const Tensor* t : net.params())
    for (double v : t->data()) put_f64(out, v);
  if (prep.zca) {
    for (double v : prep.zca->mean) put_f64(out, v);
    for (double v : prep.zca->whitening.data()) put_f64(out, v);
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write checkpoint " + path.string());
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("short write to " + path.string());
}

Model load_checkpoint(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open checkpoint " + path.string());
  std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kCheckpointMagic, 8) != 0)
    throw FormatError(path.string() + ": bad checkpoint magic at byte offset 0");
  Reader in(std::vector<unsigned char>(bytes.begin() + 8, bytes.end()), path.string());
  const std::uint64_t len = in.u64();
  if (len > bytes.size()) throw FormatError(path.string() + ": text length exceeds file size");
  const std::string text = in.text(len);

  Preprocess prep;
  std::optional<Shape> zca_shape;
  std::string spec_text;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.rfind("prep ", 0) != 0) {
      spec_text += line + '\n';
      continue;
    }
    std::istringstream ls(line.substr(5));
    std::string key;
    ls >> key;
    if (key == "invert" || key == "grayscale") {
      int v = 0;
      if (!(ls >> v)) throw FormatError(path.string() + ": bad line '" + line + "'");
      (key == "invert" ? prep.invert : prep.grayscale) = v != 0;
    } else if (key == "features") {
      double t = 0;
      if (!(ls >> t)) throw FormatError(path.string() + ": bad line '" + line + "'");
      prep.features_threshold = t;
    } else if (key == "zca") {
      Shape s;
      std::size_t d;
      while (ls >> d) s.push_back(d);
      if (s.empty()) throw FormatError(path.string() + ": zca line without shape");
      zca_shape = s;
    } else {
      throw FormatError(path.string() + ": unknown preprocessing key '" + key + "'");
    }
  }

  Network net(NetworkSpec::from_text(spec_text));
  for (Tensor* t : net.params()) in.fill(*t);
  if (zca_shape) {
    const std::size_t d = shape_size(*zca_shape);
    ZcaTransform z{*zca_shape, std::vector<double>(d), Tensor({d, d})};
    for (double& v : z.mean) v = in.f64();
    in.fill(z.whitening);
    prep.zca = std::move(z);
  }
  if (!in.at_end())
    throw FormatError(path.string() + ": trailing bytes at offset " + std::to_string(in.pos() + 8));
  return {std::move(net), std::move(prep)};
}

}  // namespace nforge
