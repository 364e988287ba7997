#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "fixtures.hpp"
#include "helpers.hpp"
#include "nforge/checkpoint.hpp"
#include "nforge/dataio.hpp"

namespace nforge {
namespace {

namespace fs = std::filesystem;
using test::TempDir;

struct CliResult {
  int code = -1;
  std::string out;
};

CliResult run_cli(const std::string& args) {
  const std::string cmd = std::string(NFORGE_CLI_PATH) + " " + args + " 2>&1";
  CliResult r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::size_t count_entries(const fs::path& dir) {
  if (!fs::exists(dir)) return 0;
  return static_cast<std::size_t>(std::distance(fs::directory_iterator(dir), fs::directory_iterator()));
}

// 60 striped 12x12 images, written as an IDX pair under `dir`.
std::string small_idx(const TempDir& dir) {
  Dataset ds;
  Rng rng(3);
  for (int i = 0; i < 60; ++i) {
    Tensor img({1, 12, 12});
    for (std::size_t r = 0; r < 12; ++r)
      for (std::size_t c = 0; c < 12; ++c)
        img(0, r, c) = (r + c + static_cast<std::size_t>(i % 10)) % 4 == 0 ? 0.0 : rng.uniform(0.6, 1.0);
    ds.samples.push_back({img, i % 10});
  }
  write_idx(ds, dir / "s-images.idx", dir / "s-labels.idx");
  return "--set images=" + (dir / "s-images.idx").string() + " --set labels=" + (dir / "s-labels.idx").string() +
         " --set train_count=40 --set conv_widths=2,2,2,2 --set dense_widths=8";
}

TEST(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(run_cli("--help").code, 0);
  EXPECT_EQ(run_cli("").code, 2);
  EXPECT_EQ(run_cli("train --bogus").code, 2);
}

TEST(Cli, ConvertMatchesDirectLoad) {
  TempDir dir;
  fs::create_directories(dir / "pnm");
  Rng rng(1);
  for (int i = 0; i < 30; ++i) {
    Tensor img({1, 6, 5});
    for (double& v : img.data()) v = static_cast<double>(rng.below(256)) / 255.0;
    write_pnm(dir / ("pnm/" + std::to_string(i % 10) + "_" + std::to_string(1000 + i) + ".pgm"), img);
  }
  const CliResult r = run_cli("convert --input " + (dir / "pnm").string() + " --out " + (dir / "out/set").string());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("30 samples"), std::string::npos);
  const Dataset a = load_idx(dir / "out/set-images.idx", dir / "out/set-labels.idx");
  const Dataset b = load_pnm(dir / "pnm");
  ASSERT_EQ(a.size(), 30u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.samples[i].image, b.samples[i].image);
    EXPECT_EQ(a.samples[i].label, b.samples[i].label);
  }
}

TEST(Cli, ConvertEmptyDirectoryFailsWithoutOutput) {
  TempDir dir;
  fs::create_directories(dir / "empty");
  const CliResult r = run_cli("convert --input " + (dir / "empty").string() + " --out " + (dir / "o").string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("empty"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "o-images.idx"));
  EXPECT_FALSE(fs::exists(dir / "o-labels.idx"));
}

TEST(Cli, TrainWritesRunDirectory) {
  TempDir dir;
  const std::string data = small_idx(dir);
  const CliResult r = run_cli("train " + data + " --epochs 3 --batch-size 8 --out " + (dir / "runs").string());
  ASSERT_EQ(r.code, 0) << r.out;
  ASSERT_EQ(count_entries(dir / "runs"), 1u);
  const fs::path run = fs::directory_iterator(dir / "runs")->path();
  EXPECT_NE(run.filename().string().find("-seed1"), std::string::npos);
  std::istringstream metrics(read_file(run / "metrics.csv"));
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(metrics, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "epoch,train_loss,train_acc,val_acc,seconds");
  EXPECT_EQ(lines[3].substr(0, 2), "3,");
  for (const char* f : {"config.cfg", "best.ckpt", "final.ckpt", "confusion.csv", "summary.txt", "timing.csv"})
    EXPECT_TRUE(fs::exists(run / f)) << f;
  EXPECT_NE(read_file(run / "summary.txt").find("best_val_accuracy"), std::string::npos);

  const CliResult e = run_cli("eval --checkpoint " + (run / "final.ckpt").string() + " --images " +
                        (dir / "s-images.idx").string() + " --labels " + (dir / "s-labels.idx").string() +
                        " --split val --train-count 40");
  ASSERT_EQ(e.code, 0) << e.out;
  EXPECT_NE(e.out.find("samples 20"), std::string::npos);
}

TEST(Cli, TrainWithMissingDatasetIsUsageError) {
  TempDir dir;
  const CliResult r = run_cli("train --set images=/nope/i.idx --set labels=/nope/l.idx --out " + (dir / "runs").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("not found"), std::string::npos);
  EXPECT_EQ(count_entries(dir / "runs"), 0u);
}

TEST(Cli, EvalReferenceFixture) {
  TempDir dir;
  write_idx(fixture::reference_dataset(), dir / "f-images.idx", dir / "f-labels.idx");
  save_checkpoint(dir / "id.ckpt", fixture::identity_network(), fixture::identity_preprocess());
  const std::string data = " --images " + (dir / "f-images.idx").string() + " --labels " + (dir / "f-labels.idx").string();
  const CliResult r = run_cli("eval --checkpoint " + (dir / "id.ckpt").string() + data + " --dump " + (dir / "wrong").string());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("accuracy 0.9940"), std::string::npos) << r.out;
  EXPECT_EQ(count_entries(dir / "wrong"), 3u);

  std::string bytes = read_file(dir / "id.ckpt");
  bytes[1] = '?';
  std::ofstream(dir / "bad.ckpt", std::ios::binary) << bytes;
  const CliResult bad = run_cli("eval --checkpoint " + (dir / "bad.ckpt").string() + data);
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.out.find("magic"), std::string::npos);

  // Zero weights: every logit ties and argmax picks class 0.
  Network zero = fixture::identity_network();
  for (Tensor* p : zero.params()) p->fill(0.0);
  save_checkpoint(dir / "zero.ckpt", zero, fixture::identity_preprocess());
  const CliResult z = run_cli("eval --checkpoint " + (dir / "zero.ckpt").string() + data);
  EXPECT_NE(z.out.find("accuracy 0.1000"), std::string::npos) << z.out;
}

TEST(Cli, GradcheckExitCodes) {
  const CliResult ok = run_cli("gradcheck --trials 2");
  EXPECT_EQ(ok.code, 0) << ok.out;
  EXPECT_NE(ok.out.find("PASS"), std::string::npos);
  const CliResult bad = run_cli("gradcheck --trials 2 --corrupt relu");
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.out.find("FAIL"), std::string::npos);
}

TEST(Cli, FeaturesCsv) {
  TempDir dir;
  Dataset ds;
  for (int i = 0; i < 4; ++i) ds.samples.push_back({Tensor({1, 32, 32}, 0.25 * i), i});
  write_idx(ds, dir / "i.idx", dir / "l.idx");
  const CliResult r = run_cli("features --images " + (dir / "i.idx").string() + " --labels " + (dir / "l.idx").string() +
                        " --out " + (dir / "f.csv").string());
  ASSERT_EQ(r.code, 0) << r.out;
  std::istringstream csv(read_file(dir / "f.csv"));
  std::string header, row;
  std::getline(csv, header);
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), 88);
  EXPECT_EQ(header.substr(header.size() - 5), "label");
  int rows = 0;
  while (std::getline(csv, row)) {
    EXPECT_EQ(std::count(row.begin(), row.end(), ','), 88);
    ++rows;
  }
  EXPECT_EQ(rows, 4);
}

TEST(Cli, AugmentPreview) {
  TempDir dir;
  const std::string data = small_idx(dir);
  const CliResult r = run_cli("augment-preview " + data + " -n 5 --dir " + (dir / "prev").string());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(count_entries(dir / "prev"), 10u);
  bool any_changed = false;
  for (int k = 0; k < 5; ++k)
    for (const auto& e : fs::directory_iterator(dir / "prev")) {
      const std::string name = e.path().filename().string();
      if (name.rfind("orig_" + std::to_string(k) + "_", 0) != 0) continue;
      const fs::path aug = dir / "prev" / ("aug_" + name.substr(5));
      ASSERT_TRUE(fs::exists(aug));
      any_changed |= read_file(e.path()) != read_file(aug);
    }
  EXPECT_TRUE(any_changed);

  const CliResult z = run_cli("augment-preview " + data +
                        " --set rotation_deg_max=0 --set shift_frac_max=0 --set zoom_frac_max=0 -n 5 --dir " +
                        (dir / "same").string());
  ASSERT_EQ(z.code, 0) << z.out;
  for (const auto& e : fs::directory_iterator(dir / "same")) {
    const std::string name = e.path().filename().string();
    if (name.rfind("orig_", 0) != 0) continue;
    EXPECT_EQ(read_file(e.path()), read_file(dir / "same" / ("aug_" + name.substr(5))));
  }
}

}  // namespace
}  // namespace nforge
