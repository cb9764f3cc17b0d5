// Copyright 2026 The dogvc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>

#include "dogvc/nets/ops.hpp"
#include "dogvc/train.hpp"
#include "toy.hpp"

using namespace dogvc;
using namespace dogvc::train;
using dogvc::fixtures::TempDir;

namespace {

class ToyData : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir("train");
    corpus_ = new fixtures::ToyCorpus(fixtures::make_toy_corpus(dir_->path(), 6, 0.6));
  }
  static void TearDownTestSuite() {
    delete corpus_;
    delete dir_;
  }
  static TrainingData data(dsp::FeatureKind kind) {
    return TrainingData::load(corpus_->manifest, corpus_->featdir, corpus_->domains, kind, corpus_->analysis.hash());
  }
  static TempDir* dir_;
  static fixtures::ToyCorpus* corpus_;
};

TempDir* ToyData::dir_ = nullptr;
fixtures::ToyCorpus* ToyData::corpus_ = nullptr;

nets::Tensor random_tensor(int n, int c, int t, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  nets::Tensor x(n, c, t);
  for (auto& v : x.data()) v = g(rng);
  return x;
}

}  // namespace

TEST(TrainConfig, JsonRoundTripAndStrictKeys) {
  TrainConfig c;
  c.method = Method::acvae;
  c.feature_kind = dsp::FeatureKind::mcc;
  c.kernel_delta = -1;
  c.weights.cyc = 3.5;
  c.seed = 99;
  const auto back = TrainConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  EXPECT_THROW(TrainConfig::from_json(R"({"stpes": 3})"), Error);
  EXPECT_THROW(TrainConfig::from_json(R"({"method": "vqvae"})"), Error);
  TrainConfig bad;
  bad.kernel_delta = 3;
  EXPECT_THROW(bad.validate(), Error);
}

TEST(Losses, IdentityGeneratorGivesZeroCycleAndIdentity) {
  auto cfg = fixtures::toy_arch();
  cfg.num_domains = 2;
  nets::StarGanNets nets(cfg, 6, 1);
  Batch b{random_tensor(3, 6, 24, 1), {0, 1, 0}};
  const GeneratorFn identity = [](const nets::Var& x, const nets::Tensor&) { return x; };
  const auto g = stargan_generator_loss(b, {1, 0, 1}, nets, LossWeights{}, nets::ForwardMode::frozen_train(), identity);
  EXPECT_EQ(g.report.at("cycle"), 0.0);
  EXPECT_EQ(g.report.at("identity"), 0.0);
  EXPECT_TRUE(std::isfinite(g.report.at("adv_g")));
}

TEST(Losses, TotalsAreWeightedSums) {
  auto cfg = fixtures::toy_arch();
  cfg.num_domains = 2;
  LossWeights w{0.5, 2.0, 3.0, 7.0, 11.0};
  Batch b{random_tensor(2, 5, 24, 2), {0, 1}};
  nets::StarGanNets sg(cfg, 5, 2);
  const auto g = stargan_generator_loss(b, {1, 0}, sg, w, nets::ForwardMode::frozen_train());
  const auto& t = g.report.terms;
  EXPECT_NEAR(t.at("total"), t.at("adv_g") + 3.0 * t.at("cls_fake") + 7.0 * t.at("cycle") + 11.0 * t.at("identity"),
              1e-9);
  const auto d = stargan_critic_loss(b, {1, 0}, sg, w, nets::ForwardMode::frozen_train());
  EXPECT_NEAR(d.report.at("total"), d.report.at("adv_d") + 3.0 * d.report.at("cls_real"), 1e-9);

  nets::AcvaeNets av(cfg, 5, 2);
  const auto eps = random_tensor(2, cfg.latent_dim, 12, 3);
  const auto a = acvae_loss(b, av, w, eps, {1, 0}, nets::ForwardMode::frozen_train());
  const auto& at = a.report.terms;
  EXPECT_NEAR(at.at("total"), at.at("recon") + 0.5 * at.at("kl") + 2.0 * (at.at("aux") + at.at("cls_real")), 1e-9);
}

TEST(Losses, RejectBadLabels) {
  auto cfg = fixtures::toy_arch();
  cfg.num_domains = 2;
  nets::StarGanNets nets(cfg, 4, 1);
  Batch b{random_tensor(2, 4, 24, 1), {0, 5}};
  EXPECT_THROW(stargan_critic_loss(b, {1, 0}, nets, {}, nets::ForwardMode::frozen_train()), Error);
}

TEST(Adam, MinimizesQuadraticAndClips) {
  auto p = nets::parameter(nets::Tensor(1, 3, 1, 5.0));
  Adam opt({{"p", p}}, 0.1);
  for (int i = 0; i < 500; ++i) {
    opt.zero_grad();
    nets::backward(nets::l1_loss(p, nets::constant(nets::Tensor(1, 3, 1, 1.0))));
    opt.step(1e9);
  }
  for (double v : p->value.data()) EXPECT_NEAR(v, 1.0, 0.2);

  auto q = nets::parameter(nets::Tensor(1, 4, 1, 0.0));
  q->grad_buffer().fill(3.0);
  EXPECT_NEAR(global_grad_norm({{"q", q}}), 6.0, 1e-12);
  Adam clipped({{"q", q}}, 0.1);
  const double norm = clipped.step(1.0);
  EXPECT_NEAR(norm, 6.0, 1e-12);
}

TEST_F(ToyData, LoadsTrainSplitWithPerSlotStats) {
  const auto d = data(dsp::FeatureKind::melspec);
  EXPECT_EQ(d.feature_dim(), corpus_->analysis.n_mels);
  EXPECT_EQ(d.active_slots(), (std::vector<int>{0, 1}));
  EXPECT_GT(d.log_f0_stats()[1].mean, d.log_f0_stats()[0].mean);  // dog clips are higher
  std::mt19937_64 rng(1);
  const auto b = d.sample(5, 40, rng);
  EXPECT_EQ(b.x.n(), 5);
  EXPECT_EQ(b.x.c(), d.feature_dim());
  EXPECT_EQ(b.x.t(), 40);
  // Crops longer than any clip tile instead of failing.
  const auto long_batch = d.sample(2, d.shortest_item() * 3, rng);
  EXPECT_EQ(long_batch.x.t(), d.shortest_item() * 3);
  const auto others = d.other_labels(b.labels, rng);
  for (std::size_t i = 0; i < others.size(); ++i) EXPECT_NE(others[i], b.labels[i]);
}

TEST_F(ToyData, RejectsFeaturesFromAnotherAnalysis) {
  EXPECT_THROW(TrainingData::load(corpus_->manifest, corpus_->featdir, corpus_->domains, dsp::FeatureKind::melspec,
                                  corpus_->analysis.hash() + 1),
               Error);
}

TEST_F(ToyData, TrainingIsDeterministicAndWritesRunDirectory) {
  const auto d = data(dsp::FeatureKind::melspec);
  for (Method m : {Method::stargan, Method::acvae}) {
    auto cfg = fixtures::toy_train_config(m, dsp::FeatureKind::melspec, 6);
    cfg.checkpoint_every = 3;
    RunOptions opts;
    opts.rundir = dir_->path() / ("run-" + to_string(m));
    opts.analysis = corpus_->analysis;
    const auto a = train_model(cfg, fixtures::toy_arch(), d, opts);
    const auto b = train_model(cfg, fixtures::toy_arch(), d);
    EXPECT_EQ(format_log_csv(a.log), format_log_csv(b.log)) << to_string(m);
    cfg.seed += 1;
    EXPECT_NE(format_log_csv(train_model(cfg, fixtures::toy_arch(), d).log), format_log_csv(a.log));

    ASSERT_EQ(a.log.size(), 6u);
    for (const auto& r : a.log) r.require_finite();
    const auto& run = *opts.rundir;
    EXPECT_TRUE(std::filesystem::exists(run / "config.json"));
    EXPECT_TRUE(std::filesystem::exists(run / "checkpoints" / "step_0000003.ckpt"));
    EXPECT_TRUE(std::filesystem::exists(run / "checkpoints" / "latest.ckpt"));
    const auto csv = read_file(run / "log.csv");
    EXPECT_EQ(csv.rfind("step,term,value\n", 0), 0u);

    const auto loaded = load_model(run / "checkpoints" / "latest.ckpt");
    EXPECT_EQ(loaded.step, 6u);
    EXPECT_EQ(loaded.meta.method, m);
    EXPECT_EQ(loaded.meta.feature_dim, d.feature_dim());
    EXPECT_EQ(loaded.meta.analysis.hash(), corpus_->analysis.hash());
    EXPECT_EQ(loaded.meta.norm.size(), 2u);
  }
}

TEST_F(ToyData, CropShorterThanCriticReceptiveFieldIsRejected) {
  const auto d = data(dsp::FeatureKind::melspec);
  auto cfg = fixtures::toy_train_config(Method::stargan, dsp::FeatureKind::melspec, 1);
  cfg.crop_frames = 4;
  EXPECT_THROW(train_model(cfg, fixtures::toy_arch(), d), Error);
}

TEST(ModelMetadata, JsonRoundTrip) {
  ModelMetadata m;
  m.method = Method::acvae;
  m.feature_kind = dsp::FeatureKind::mcc;
  m.feature_dim = 17;
  m.domains = corpus::DomainSet::default_six();
  m.arch_text = fixtures::toy_arch().to_text();
  m.kernel_delta = 1;
  m.norm.resize(6);
  for (auto& n : m.norm) {
    n.mean = Vector::Constant(17, 0.5);
    n.std = Vector::Constant(17, 2.0);
  }
  m.log_f0.resize(6);
  m.log_f0[3] = {5.5, 0.25, 100};
  m.train_config = TrainConfig{}.to_json();
  const auto back = ModelMetadata::from_json(m.to_json());
  EXPECT_EQ(back.to_json(), m.to_json());
}

TEST(Losses, HeavyKlWeightCollapsesPosteriorOnIdenticalSamples) {
  auto cfg = fixtures::toy_arch();
  cfg.num_domains = 2;
  nets::AcvaeNets nets(cfg, 6, 3);
  const auto one = random_tensor(1, 6, 16, 4);
  nets::Tensor x(4, 6, 16);
  for (int n = 0; n < 4; ++n) {
    for (int c = 0; c < 6; ++c) {
      for (int t = 0; t < 16; ++t) x(n, c, t) = one(0, c, t);
    }
  }
  const Batch b{x, {0, 0, 0, 0}};
  LossWeights w;
  w.kl = 1e3;
  Adam opt(nets.vae_parameters(), 2e-3);
  std::mt19937_64 rng(1);
  std::vector<double> kl;
  for (int step = 0; step < 150; ++step) {
    nets::Tensor eps(4, cfg.latent_dim, 8);
    std::normal_distribution<double> g;
    for (auto& v : eps.data()) v = g(rng);
    opt.zero_grad();
    const auto r = acvae_loss(b, nets, w, eps, {1, 1, 1, 1}, nets::ForwardMode::train());
    nets::backward(r.total);
    opt.step(10.0);
    ASSERT_GE(r.report.at("kl"), 0.0);
    kl.push_back(r.report.at("kl"));
  }
  EXPECT_LT(kl.back(), kl[9]);
  EXPECT_LT(kl.back(), 1e-2);
}

TEST(Losses, ZeroWeightsReduceAcvaeToReconstruction) {
  auto cfg = fixtures::toy_arch();
  cfg.num_domains = 2;
  nets::AcvaeNets nets(cfg, 5, 2);
  const Batch b{random_tensor(2, 5, 24, 5), {0, 1}};
  const LossWeights w{0.0, 0.0, 1.0, 10.0, 5.0};
  const auto eps = random_tensor(2, cfg.latent_dim, 12, 6);
  const auto r = acvae_loss(b, nets, w, eps, {1, 0}, nets::ForwardMode::frozen_train());
  EXPECT_EQ(r.report.at("total"), r.report.at("recon"));
}
