#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "recnet/ops.hpp"
#include "recnet/reconstructor.hpp"

using namespace recnet;
using namespace recnet::testing;
using recon::ReconDims;
using recon::ReconKind;

namespace {

const ReconDims kDims{6, 5, 4};

struct Setup {
  ad::ParameterSet ps;
  std::vector<ad::Tensor> hidden;
  data::SampledFeatures video;
};

Setup make_setup(ReconKind kind, std::uint64_t seed, std::size_t steps, std::size_t valid) {
  Setup s;
  Rng rng(seed);
  recon::Reconstructor::create_params(kind, s.ps, kDims, rng);
  randomize(s.ps, rng, 0.6);
  s.hidden = random_hidden(steps, kDims.input, rng);
  s.video = random_video(kDims.hidden, valid, rng);
  return s;
}

void expect_mat_near(const Mat& a, const Mat& b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i].size(), b[i].size());
    for (std::size_t k = 0; k < a[i].size(); ++k) EXPECT_NEAR(a[i][k], b[i][k], tol) << i << "," << k;
  }
}

}  // namespace

TEST(Recon, KindNames) {
  for (auto k : {ReconKind::none, ReconKind::global, ReconKind::local, ReconKind::joint}) {
    EXPECT_EQ(recon::parse_recon_kind(recon::to_string(k)), k);
  }
  EXPECT_THROW(recon::parse_recon_kind("temporal"), std::invalid_argument);
}

TEST(Recon, JointSharesLocalParameters) {
  ad::ParameterSet a, b;
  Rng r1(1), r2(1);
  recon::Reconstructor::create_params(ReconKind::joint, a, kDims, r1);
  recon::Reconstructor::create_params(ReconKind::local, b, kDims, r2);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].name, b[i].name);
  EXPECT_TRUE(a.find("recon.local.attn.w_beta"));
  ad::ParameterSet none;
  recon::Reconstructor::create_params(ReconKind::none, none, kDims, r1);
  EXPECT_EQ(none.size(), 0u);
}

TEST(Recon, GlobalMatchesOracle) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto s = make_setup(ReconKind::global, seed, 2 + seed, 5 * seed);
    recon::Reconstructor rec(ReconKind::global, s.ps, kDims);
    auto tr = rec.run(s.hidden, s.video);
    const auto h = values_of(s.hidden);
    expect_mat_near(values_of(tr.z), oracle_global_z(s.ps, kDims, h), 1e-12);
    EXPECT_NEAR(tr.loss.item(), oracle_global_loss(s.ps, kDims, h, s.video), 1e-12);
    EXPECT_EQ(tr.z.size(), s.hidden.size());
  }
}

TEST(Recon, LocalMatchesOracle) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    for (bool valid_only : {false, true}) {
      auto s = make_setup(ReconKind::local, seed, 1 + seed, 3 + 5 * seed);
      recon::ReconOptions opts;
      opts.local_valid_only = valid_only;
      recon::Reconstructor rec(ReconKind::local, s.ps, kDims, opts);
      auto tr = rec.run(s.hidden, s.video);
      const auto h = values_of(s.hidden);
      ASSERT_EQ(tr.z.size(), data::kSampledFrames);
      expect_mat_near(values_of(tr.z), oracle_local_z(s.ps, kDims, h), 1e-12);
      EXPECT_NEAR(tr.loss.item(), oracle_local_loss(s.ps, kDims, h, s.video, valid_only), 1e-12);
      ASSERT_EQ(tr.beta.size(), data::kSampledFrames);
      for (const auto& row : tr.beta) {
        ASSERT_EQ(row.size(), s.hidden.size());
        EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 1.0, 1e-12);
      }
    }
  }
}

TEST(Recon, JointMatchesOracleAndSplitsTerms) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto s = make_setup(ReconKind::joint, seed, 4, 4 * seed + 2);
    recon::Reconstructor rec(ReconKind::joint, s.ps, kDims);
    auto tr = rec.run(s.hidden, s.video);
    const auto h = values_of(s.hidden);
    EXPECT_NEAR(tr.loss.item(), oracle_joint_loss(s.ps, kDims, h, s.video), 1e-12);
    EXPECT_NEAR(tr.global_term + tr.local_term, tr.loss.item(), 1e-12);
    EXPECT_NEAR(tr.local_term, oracle_local_loss(s.ps, kDims, h, s.video), 1e-12);
  }
}

TEST(Recon, PerfectReconstructionHasZeroLoss) {
  Rng rng(4);
  auto video = random_video(5, 12, rng);
  std::vector<ad::Tensor> z;
  for (std::size_t j = 0; j < data::kSampledFrames; ++j) {
    z.push_back(ad::Tensor::vector({video.row(j).begin(), video.row(j).end()}));
  }
  EXPECT_EQ(recon::local_loss(z, video).item(), 0.0);
  EXPECT_EQ(recon::local_loss(z, video, true).item(), 0.0);
  // Global: any sequence whose mean equals the valid-frame mean.
  const auto mean = recon::valid_frame_mean(video);
  std::vector<ad::Tensor> zg(3, ad::Tensor::vector(mean));
  EXPECT_NEAR(recon::global_loss(zg, video).item(), 0.0, 1e-30);
}

TEST(Recon, LossIsMeanSquaredDistance) {
  data::SampledFeatures video{2, 1, std::vector<double>(2 * data::kSampledFrames, 0.0)};
  video.values[0] = 1.0;
  video.values[1] = 3.0;
  std::vector<ad::Tensor> zg{ad::Tensor::vector({0.0, 0.0})};
  EXPECT_DOUBLE_EQ(recon::global_loss(zg, video).item(), (1.0 + 9.0) / 2.0);
  std::vector<ad::Tensor> zl(data::kSampledFrames, ad::Tensor::vector({0.0, 0.0}));
  EXPECT_DOUBLE_EQ(recon::local_loss(zl, video).item(), 5.0 / 28.0);
  EXPECT_DOUBLE_EQ(recon::local_loss(zl, video, true).item(), 5.0);
}

TEST(Recon, ShapeErrors) {
  auto s = make_setup(ReconKind::global, 1, 3, 10);
  recon::Reconstructor rec(ReconKind::global, s.ps, kDims);
  Rng rng(2);
  EXPECT_THROW(rec.run({}, s.video), std::invalid_argument);
  EXPECT_THROW(rec.run(random_hidden(2, 3, rng), s.video), ad::DimensionError);
  EXPECT_THROW(rec.run(s.hidden, random_video(7, 10, rng)), ad::DimensionError);
  recon::Reconstructor off;
  EXPECT_FALSE(off.enabled());
  EXPECT_THROW(off.run(s.hidden, s.video), std::logic_error);
}
