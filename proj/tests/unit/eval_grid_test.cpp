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

#include "dogvc/eval.hpp"
#include "toy.hpp"

using namespace dogvc;
using namespace dogvc::eval;
using dogvc::fixtures::TempDir;
namespace fs = std::filesystem;

namespace {

class Grids : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir("grid");
    corpus_ = new fixtures::ToyCorpus(fixtures::make_toy_corpus(dir_->path(), 4, 0.5));
    // exp1 leaves acvae-melspec untrained to exercise gap rows.
    for (const auto& cell : experiment1_grid().cells) {
      if (cell.condition != "acvae-melspec") train_cell(dir_->path() / "runs1", cell);
    }
    for (const auto& cell : experiment2_grid().cells) train_cell(dir_->path() / "runs2", cell);
  }
  static void TearDownTestSuite() {
    delete corpus_;
    delete dir_;
  }
  static void train_cell(const fs::path& root, const GridCell& cell) {
    const auto data = train::TrainingData::load(corpus_->manifest, corpus_->featdir, corpus_->domains, cell.features,
                                                corpus_->analysis.hash());
    auto cfg = fixtures::toy_train_config(cell.method, cell.features, 2);
    cfg.kernel_delta = cell.kernel_delta;
    train::RunOptions opts;
    opts.rundir = root / cell.condition;
    opts.analysis = corpus_->analysis;
    train::train_model(cfg, fixtures::toy_arch(), data, opts);
  }
  static EvalInputs inputs(const std::string& runs, const std::string& out) {
    EvalInputs in;
    in.manifest = corpus_->manifest;
    in.rundir = dir_->path() / runs;
    in.out_dir = dir_->path() / out;
    in.base_arch = fixtures::toy_arch();
    in.analysis = corpus_->analysis;
    return in;
  }
  static TempDir* dir_;
  static fixtures::ToyCorpus* corpus_;
};

TempDir* Grids::dir_ = nullptr;
fixtures::ToyCorpus* Grids::corpus_ = nullptr;

std::vector<std::string> conditions(const Report& r) {
  std::vector<std::string> out;
  for (const auto& row : r.rows) out.push_back(row.condition);
  return out;
}

}  // namespace

TEST(GridDefinition, ExperimentOneAndTwoCells) {
  const auto g1 = experiment1_grid();
  ASSERT_EQ(g1.cells.size(), 4u);
  EXPECT_EQ(g1.source, "FKN");
  EXPECT_EQ(g1.target, "adult_dog");
  for (const auto& c : g1.cells) EXPECT_EQ(c.kernel_delta, 0);
  const auto g2 = experiment2_grid();
  ASSERT_EQ(g2.cells.size(), 5u);
  std::vector<int> deltas;
  for (const auto& c : g2.cells) {
    deltas.push_back(c.kernel_delta);
    EXPECT_EQ(c.method, train::Method::stargan);
    EXPECT_EQ(c.features, dsp::FeatureKind::melspec);
  }
  EXPECT_EQ(deltas, (std::vector<int>{2, 1, 0, -1, -2}));
  EXPECT_EQ(g2.cells[2].label, "k_d");
  EXPECT_EQ(g2.cells[0].label, "k_d +2");
  EXPECT_EQ(parse_grid(to_string(GridKind::exp2)), GridKind::exp2);
  EXPECT_THROW(parse_grid("exp3"), Error);
}

TEST(Controls, WhiteNoiseLevelAndDeterminism) {
  const auto a = white_noise(0.5, 16000, 3);
  EXPECT_EQ(a.samples, white_noise(0.5, 16000, 3).samples);
  EXPECT_NE(a.samples, white_noise(0.5, 16000, 4).samples);
  EXPECT_NEAR(dsp::rms_dbfs(a), -20.0, 0.05);
  EXPECT_EQ(mel_l1(a, a, fixtures::toy_analysis()), 0.0);
  EXPECT_GT(mel_l1(a, fixtures::sine(440, 0.5), fixtures::toy_analysis()), 0.5);
}

TEST_F(Grids, ExperimentOneRowStructureWithGap) {
  const auto r = run_experiment1(inputs("runs1", "out1")).report;
  EXPECT_EQ(conditions(r), (std::vector<std::string>{"stargan-mcc", "stargan-melspec", "acvae-mcc", "acvae-melspec",
                                                     "FKN-original", "adult_dog-original", "white-noise"}));
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const auto& row = r.rows[i];
    EXPECT_EQ(row.control, i >= 4);
    EXPECT_EQ(row.missing, row.condition == "acvae-melspec");
    if (!row.missing) {
      EXPECT_TRUE(row.objective.count("mel_l1_to_source")) << row.condition;
    }
    EXPECT_TRUE(row.published_mos[0].has_value()) << row.condition;
  }
  // The gap row still reports the architecture it would have had.
  EXPECT_TRUE(r.rows[3].receptive_field.has_value());
  EXPECT_TRUE(r.rows[3].config_hash.empty());
  EXPECT_FALSE(r.rows[0].config_hash.empty());
  // The unconverted source is its own reference.
  EXPECT_EQ(r.rows[4].objective.at("mel_l1_to_source"), 0.0);
  EXPECT_EQ(r.rows[1].published_mos[0], 4.20);
  EXPECT_EQ(r.rows[0].published_cer[1], 1.00);
  EXPECT_FALSE(r.rows[5].published_cer[0].has_value());
  EXPECT_EQ(r.rows[5].label, "Adult Dog (original)");

  const auto md = r.to_markdown();
  EXPECT_NE(md.find("(not trained)"), std::string::npos);
  EXPECT_NE(md.find("StarGAN-VC (melspec)"), std::string::npos);
  EXPECT_EQ(md.find(dir_->path().string()), std::string::npos);
  EXPECT_EQ(r.to_csv().find(dir_->path().string()), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_->path() / "out1" / "experiment.json"));
  EXPECT_TRUE(fs::exists(dir_->path() / "out1" / "stargan-mcc" / "s1.wav"));
  EXPECT_TRUE(fs::exists(dir_->path() / "out1" / "stargan-mcc" / "s1.wav.json"));
}

TEST_F(Grids, ExperimentTwoRowStructureAndReceptiveFields) {
  const auto r = run_experiment2(inputs("runs2", "out2")).report;
  EXPECT_EQ(conditions(r), (std::vector<std::string>{"delta+2", "delta+1", "delta+0", "delta-1", "delta-2",
                                                     "FKN-original", "adult_dog-original", "white-noise"}));
  for (int i = 0; i < 4; ++i) {
    ASSERT_TRUE(r.rows[i].receptive_field && r.rows[i + 1].receptive_field);
    EXPECT_GT(*r.rows[i].receptive_field, *r.rows[i + 1].receptive_field);
  }
  for (int i = 0; i < 5; ++i) {
    EXPECT_FALSE(r.rows[i].missing);
    EXPECT_EQ(r.rows[i].kernel_delta, 2 - i);
  }
  EXPECT_EQ(r.rows[3].published_cer[0], 0.83);
  EXPECT_EQ(r.rows[2].published_mos[1], 2.80);
  const auto md = r.to_markdown();
  EXPECT_NE(md.find("k_d +2"), std::string::npos);
}

TEST_F(Grids, GridRunsAreDeterministic) {
  const auto a = run_experiment2(inputs("runs2", "det-a"));
  const auto b = run_experiment2(inputs("runs2", "det-b"));
  EXPECT_EQ(a.report.to_markdown(), b.report.to_markdown());
  EXPECT_EQ(a.report.to_csv(), b.report.to_csv());
  EXPECT_EQ(a.experiment.to_json(), b.experiment.to_json());
  for (const auto& c : a.experiment.clips) {
    EXPECT_EQ(read_file(dir_->path() / "det-a" / c.path), read_file(dir_->path() / "det-b" / c.path)) << c.id;
  }
}

TEST_F(Grids, ListeningDataFoldsIntoRows) {
  auto in = inputs("runs1", "out-listen");
  const auto eval_fkn = corpus_->manifest.clips_in("FKN", corpus::Split::eval);
  ASSERT_EQ(eval_fkn.size(), 2u);
  in.references[eval_fkn[0].id] = "wan wan";
  in.references[eval_fkn[1].id] = "kon nichi wa";
  // Two raters on stargan-mcc dog-likeness: 2 and 4 on s1, 3 on s2.
  in.ratings = {{"r1", "stargan-mcc-s1", MosScale::dog_likeness, 2, 0},
                {"r2", "stargan-mcc-s1", MosScale::dog_likeness, 4, 0},
                {"r1", "stargan-mcc-s2", MosScale::dog_likeness, 3, 0},
                {"r1", "white-noise-s1", MosScale::clarity, 1, 0}};
  in.transcripts = {{"r1", "stargan-mcc-s1", "wan wan", "", 0}, {"r2", "stargan-mcc-s1", "wa", "", 0},
                    {"r1", "FKN-original-s2", "kon nichi wa", "", 0}};
  const auto res = run_experiment1(in);
  const auto& rows = res.report.rows;
  ASSERT_TRUE(rows[0].mos[0].has_value());
  EXPECT_DOUBLE_EQ(rows[0].mos[0]->mean, 3.0);
  EXPECT_EQ(rows[0].mos[0]->n, 3);
  EXPECT_FALSE(rows[0].mos[1].has_value());
  EXPECT_EQ(rows[6].mos[2]->mean, 1.0);
  // CER of "wanwan" vs "wanwan" is 0 and vs "wa" is 4/6.
  ASSERT_TRUE(rows[0].cer[0].has_value());
  EXPECT_NEAR(*rows[0].cer[0], (0.0 + 4.0 / 6.0) / 2.0, 1e-12);
  EXPECT_EQ(rows[4].cer[1], 0.0);
  const auto md = res.report.to_markdown();
  EXPECT_NE(md.find("3.00"), std::string::npos);
  EXPECT_NE(md.find("(n=3)"), std::string::npos);
}

TEST_F(Grids, MismatchedRunDirectoryIsAnError) {
  // runs2 holds stargan-melspec cells; pointing exp1 at a copy with a swapped
  // directory name must not silently report the wrong model.
  const fs::path bad = dir_->path() / "runs-bad";
  fs::create_directories(bad);
  fs::copy(dir_->path() / "runs2" / "delta+1", bad / "stargan-melspec", fs::copy_options::recursive);
  EXPECT_THROW(run_experiment1(inputs("runs-bad", "out-bad")), Error);
}
