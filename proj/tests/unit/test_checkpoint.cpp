#include <gtest/gtest.h>

#include <fstream>
#include <iterator>

#include "helpers.hpp"
#include "nforge/augment.hpp"
#include "nforge/checkpoint.hpp"
#include "nforge/errors.hpp"

namespace nforge {
namespace {

using test::random_tensor;
using test::TempDir;

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void spit(const std::filesystem::path& p, const std::string& s) {
  std::ofstream(p, std::ios::binary | std::ios::trunc) << s;
}

Network small_cnn() {
  CnnWidths w;
  w.conv = {2, 3, 2, 2};
  w.dense = {5};
  Network net(cnn_topology({1, 12, 12}, ActivationKind::kElu, w, 0.25, 10));
  net.init(7);
  Rng rng(8);
  for (Tensor* p : net.params())
    for (double& v : p->data()) v += rng.uniform(-1e-3, 1e-3);
  return net;
}

TEST(Checkpoint, RoundTripIsBitExact) {
  TempDir dir;
  const Network net = small_cnn();
  Rng rng(1);
  std::vector<Tensor> imgs;
  for (int i = 0; i < 20; ++i) imgs.push_back(random_tensor({1, 12, 12}, rng));
  Preprocess prep;
  prep.grayscale = false;
  prep.zca = zca_fit(imgs, 1e-2);
  save_checkpoint(dir / "a.ckpt", net, prep);
  const Model m = load_checkpoint(dir / "a.ckpt");
  EXPECT_EQ(m.net.spec(), net.spec());
  const auto pa = net.params(), pb = m.net.params();
  ASSERT_EQ(pa.size(), pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(*pa[i], *pb[i]);
  EXPECT_TRUE(m.prep.invert);
  EXPECT_FALSE(m.prep.grayscale);
  EXPECT_FALSE(m.prep.features_threshold);
  ASSERT_TRUE(m.prep.zca);
  EXPECT_EQ(m.prep.zca->image_shape, prep.zca->image_shape);
  EXPECT_EQ(m.prep.zca->mean, prep.zca->mean);
  EXPECT_EQ(m.prep.zca->whitening, prep.zca->whitening);
  save_checkpoint(dir / "b.ckpt", m.net, m.prep);
  EXPECT_EQ(slurp(dir / "a.ckpt"), slurp(dir / "b.ckpt"));
}

TEST(Checkpoint, FeatureThresholdSurvives) {
  TempDir dir;
  Network net(mlp_topology(88));
  Preprocess prep;
  prep.features_threshold = 0.375;
  save_checkpoint(dir / "m.ckpt", net, prep);
  EXPECT_EQ(load_checkpoint(dir / "m.ckpt").prep.features_threshold, 0.375);
}

TEST(Checkpoint, CorruptFilesRejected) {
  TempDir dir;
  save_checkpoint(dir / "ok.ckpt", small_cnn(), Preprocess{});
  const std::string good = slurp(dir / "ok.ckpt");
  EXPECT_EQ(good.substr(0, 8), std::string("NFORGE1\0", 8));

  std::string bad = good;
  bad[0] = 'X';
  spit(dir / "magic.ckpt", bad);
  EXPECT_THROW(load_checkpoint(dir / "magic.ckpt"), FormatError);

  spit(dir / "short.ckpt", good.substr(0, good.size() - 3));
  EXPECT_THROW(load_checkpoint(dir / "short.ckpt"), FormatError);

  spit(dir / "long.ckpt", good + "x");
  EXPECT_THROW(load_checkpoint(dir / "long.ckpt"), FormatError);

  spit(dir / "header.ckpt", good.substr(0, 12));
  EXPECT_THROW(load_checkpoint(dir / "header.ckpt"), FormatError);

  EXPECT_THROW(load_checkpoint(dir / "missing.ckpt"), IoError);
}

}  // namespace
}  // namespace nforge
