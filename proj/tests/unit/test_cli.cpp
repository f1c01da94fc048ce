#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "recnet/checkpoint.hpp"

namespace fs = std::filesystem;
using namespace recnet;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(RECNET_BIN) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return {};
  Run r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path root() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "recnet_test_cli";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

// Corpus plus a config with paths relative to the config file.
fs::path corpus() {
  static const fs::path dir = [] {
    auto d = root() / "corpus";
    const auto r = run("gen-synthetic --out " + d.string() + " --num-videos 20 --dim 32 --seed 7");
    EXPECT_EQ(r.code, 0);
    std::ofstream(d / "small.cfg") << "features_dir = features\n"
                                      "captions = captions.jsonl\n"
                                      "train_split = train.txt\n"
                                      "val_split = val.txt\n"
                                      "test_split = test.txt\n"
                                      "embed_dim = 8\n"
                                      "hidden_dim = 16\n"
                                      "batch_size = 7\n";
    return d;
  }();
  return dir;
}

std::string train_args(const fs::path& out, const std::string& extra = "", int epochs = 2) {
  return "train --config " + (corpus() / "small.cfg").string() + " --max-epochs " + std::to_string(epochs) +
         " --output-dir " + out.string() + " " + extra;
}

}  // namespace

TEST(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(run("--help").code, 0);
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("gen-synthetic").code, 2);
  EXPECT_EQ(run("gen-synthetic --out " + (root() / "zero").string() + " --num-videos 0").code, 2);
  EXPECT_EQ(run("train --config /nonexistent.cfg").code, 2);
  EXPECT_EQ(run(train_args(root() / "bad", "--set hiden_dim=3")).code, 2);
  EXPECT_EQ(run("eval --checkpoint /nonexistent.ckpt").code, 4);
}

TEST(Cli, GenSyntheticIsByteIdentical) {
  const auto a = root() / "gen_a", b = root() / "gen_b";
  ASSERT_EQ(run("gen-synthetic --out " + a.string() + " --num-videos 6 --dim 16 --seed 3").code, 0);
  ASSERT_EQ(run("gen-synthetic --out " + b.string() + " --num-videos 6 --dim 16 --seed 3").code, 0);
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    ++files;
    EXPECT_EQ(slurp(e.path()), slurp(b / fs::relative(e.path(), a))) << e.path();
  }
  EXPECT_EQ(files, 6u + 4u);
}

TEST(Cli, TrainEvalCaptionDiagnose) {
  const auto out = root() / "run";
  const auto r = run(train_args(out, "--stage joint --reconstructor global"));
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "epoch,xe_loss,recon_loss,total_loss,val_cider");
  EXPECT_EQ(r.out, slurp(out / "epochs.csv"));
  for (const char* f : {"config.txt", "xe.ckpt", "joint.ckpt", "model.ckpt"}) EXPECT_TRUE(fs::exists(out / f)) << f;

  // Same seed, same bytes.
  const auto first = slurp(out / "model.ckpt");
  ASSERT_EQ(run(train_args(out, "--stage joint --reconstructor global")).code, 0);
  EXPECT_EQ(slurp(out / "model.ckpt"), first);

  // Run from another directory: stored paths are absolute.
  const auto ckpt = (out / "model.ckpt").string();
  const auto e1 = run("eval --checkpoint " + ckpt + " --split val");
  ASSERT_EQ(e1.code, 0);
  EXPECT_NE(e1.out.find("\"bleu4\""), std::string::npos);
  EXPECT_NE(e1.out.find("\"per_sentence\""), std::string::npos);
  EXPECT_EQ(run("eval --checkpoint " + ckpt + " --split val").out, e1.out);

  std::string first_id;
  std::ifstream(corpus() / "train.txt") >> first_id;
  const auto cap = run("caption --checkpoint " + ckpt + " --features " + (corpus() / "features" / (first_id + ".vfrm")).string());
  EXPECT_EQ(cap.code, 0);

  const auto diag = root() / "diag.csv";
  const auto d = run("diagnose --checkpoint " + ckpt + " --split val --out " + diag.string());
  ASSERT_EQ(d.code, 0);
  EXPECT_TRUE(std::isfinite(std::stod(d.out)));
  EXPECT_EQ(slurp(diag).rfind("mode,video_id,dim_0", 0), 0u);

  // Corrupt checkpoint.
  auto bytes = slurp(out / "model.ckpt");
  bytes.resize(bytes.size() / 2);
  std::ofstream(root() / "broken.ckpt", std::ios::binary) << bytes;
  EXPECT_EQ(run("eval --checkpoint " + (root() / "broken.ckpt").string() + " --split val").code, 4);
}

TEST(Cli, NonFiniteLossExitsThree) {
  const auto out = root() / "nan_src";
  ASSERT_EQ(run(train_args(out, "", 1)).code, 0);
  auto ck = train::read_checkpoint(out / "model.ckpt");
  for (auto& v : ck.params[0].values) v = std::numeric_limits<double>::quiet_NaN();
  const auto poisoned = root() / "nan.ckpt";
  train::save_checkpoint(ck, poisoned);
  const auto r = run(train_args(root() / "nan_run", "--stage joint --reconstructor global --init-checkpoint " + poisoned.string()));
  EXPECT_EQ(r.code, 3);
}

TEST(Cli, SweepPrintsOneRowPerLambda) {
  const auto r = run("sweep --config " + (corpus() / "small.cfg").string() +
                     " --reconstructor global --max-epochs 1 --lambdas 0,0.5 --output-dir " + (root() / "sweep").string());
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("lambda,bleu4,rougeL,cider\n0,", 0), 0u);
  EXPECT_NE(r.out.find("\n0.5,"), std::string::npos);
  EXPECT_EQ(slurp(root() / "sweep" / "sweep.csv"), r.out);
  EXPECT_EQ(run("sweep --config " + (corpus() / "small.cfg").string() + " --reconstructor global --lambdas x").code, 2);
}
