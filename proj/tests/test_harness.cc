// tests/test_harness.cc
//
// Copyright 2026  The MEMR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "memr/checkpoint.h"
#include "memr/config.h"
#include "memr/errors.h"
#include "memr/evaluate.h"
#include "memr/model.h"
#include "memr/ops.h"
#include "memr/train.h"
#include "support.h"

namespace fs = std::filesystem;

namespace memr {
namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("memr_harness_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_bytes(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(f), {});
}

void write_bytes(const fs::path& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << bytes;
}

ModelConfig small_model(int letters, int input_dim) {
  ModelConfig cfg;
  cfg.num_letters = letters;
  cfg.encoder.input_dim = input_dim;
  cfg.encoder.hidden = 8;
  cfg.encoder.blstm_layers = 1;
  cfg.encoder.vgg_channels1 = 4;
  cfg.encoder.vgg_channels2 = 4;
  cfg.attention_dim = 8;
  cfg.decoder_hidden = 8;
  cfg.embed = 4;
  return cfg;
}

SynthConfig small_data(int n) {
  SynthConfig cfg;
  cfg.vocab_size = 4;
  cfg.input_dim = 6;
  cfg.n_utts = n;
  cfg.len_max = 4;
  return cfg;
}

// ---- multi-task loss ----

TEST(MtlLoss, Endpoints) {
  const Tensor ctc = Tensor::scalar(-2.0), att = Tensor::scalar(-4.0);
  EXPECT_DOUBLE_EQ(mtl_loss(ctc, att, 1.0).item(), 2.0);
  EXPECT_DOUBLE_EQ(mtl_loss(ctc, att, 0.0).item(), 4.0);
  EXPECT_DOUBLE_EQ(mtl_loss(ctc, att, 0.5).item(), 3.0);
}

TEST(MtlLoss, LambdaOutOfRange) {
  const Tensor ctc = Tensor::scalar(-2.0), att = Tensor::scalar(-4.0);
  EXPECT_THROW(mtl_loss(ctc, att, -0.1), ConfigError);
  EXPECT_THROW(mtl_loss(ctc, att, 1.5), ConfigError);
  EXPECT_THROW(mtl_loss(ctc, att, std::nan("")), ConfigError);
}

TEST(MtlLoss, EndpointsLeaveTheOtherBranchWithoutGradient) {
  const Model model = Model::init(small_model(4, 6), 3);
  const auto data = synth_dataset(small_data(1));
  for (double lambda : {0.0, 1.0}) {
    for (Tensor p : model.parameters()) p.zero_grad();
    Tape tape;
    LossBreakdown loss;
    {
      TapeScope scope(tape);
      loss = model.loss(data[0].features, data[0].labels, lambda);
    }
    tape.backward(loss.total);
    const auto grad_norm = [](const NamedParams& params) {
      double s = 0;
      for (const auto& [name, t] : params) {
        for (double g : t.grad()) s += g * g;
      }
      return s;
    };
    NamedParams ctc_heads, decoder;
    model.ctc_head(0).collect("ctc1", ctc_heads);
    model.ctc_head(1).collect("ctc2", ctc_heads);
    model.decoder().collect("dec", decoder);
    if (lambda == 0.0) {
      EXPECT_EQ(grad_norm(ctc_heads), 0.0);
      EXPECT_GT(grad_norm(decoder), 0.0);
    } else {
      EXPECT_EQ(grad_norm(decoder), 0.0);
      EXPECT_GT(grad_norm(ctc_heads), 0.0);
    }
  }
}

TEST(MtlLoss, SingleStreamMatchesComposedPipeline) {
  ModelConfig cfg = small_model(4, 6);
  cfg.streams = StreamMode::kFirstOnly;
  const auto data = synth_dataset(small_data(5));
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const Model model = Model::init(cfg, seed);
    for (const Utterance& u : data) {
      for (double lambda : {0.0, 0.3, 1.0}) {
        const double expected = testing::composed_single_stream_loss(model, u.features, u.labels, lambda);
        EXPECT_NEAR(model.loss(u.features, u.labels, lambda).total.item(), expected, 1e-9);
      }
    }
  }
}

TEST(MtlLoss, SingleStreamIgnoresSecondEncoder) {
  ModelConfig cfg = small_model(4, 6);
  cfg.streams = StreamMode::kFirstOnly;
  const Model model = Model::init(cfg, 2);
  const auto data = synth_dataset(small_data(1));
  const double before = model.loss(data[0].features, data[0].labels, 0.3).total.item();
  NamedParams vgg;
  model.vgg().collect("enc2", vgg);
  model.ctc_head(1).collect("ctc2", vgg);
  for (auto& [name, t] : vgg) {
    Tensor handle = t;
    for (double& v : handle.mutable_data()) v += 1.0;
  }
  EXPECT_EQ(model.loss(data[0].features, data[0].labels, 0.3).total.item(), before);
}

// ---- synthetic data ----

TEST(Synth, Deterministic) {
  const auto a = synth_dataset(small_data(6)), b = synth_dataset(small_data(6));
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].id, b[i].id);
    EXPECT_EQ(a[i].labels, b[i].labels);
    EXPECT_EQ(a[i].features.shape(), b[i].features.shape());
    for (std::size_t j = 0; j < a[i].features.size(); ++j) EXPECT_EQ(a[i].features[j], b[i].features[j]);
  }
}

TEST(Synth, SplitsDifferButSharePrototypes) {
  SynthConfig c0 = small_data(4), c1 = small_data(4);
  c0.noise_sigma = c1.noise_sigma = 0.0;
  c1.split = 1;
  const auto a = synth_dataset(c0), b = synth_dataset(c1);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.size(); ++i) any_diff |= a[i].labels != b[i].labels;
  EXPECT_TRUE(any_diff);
  const Tensor proto = letter_prototypes(c0.seed, c0.vocab_size, c0.input_dim);
  for (const auto* set : {&a, &b}) {
    for (const Utterance& u : *set) {
      for (int t = 0; t < u.features.rows(); ++t) {
        bool found = false;
        for (int k = 0; k < proto.rows() && !found; ++k) {
          bool same = true;
          for (int d = 0; d < proto.cols(); ++d) same &= u.features.at(t, d) == proto.at(k, d);
          found = same;
        }
        EXPECT_TRUE(found);
      }
    }
  }
}

TEST(Synth, NoiselessFramesSpellTheLabels) {
  SynthConfig cfg = small_data(20);
  cfg.noise_sigma = 0.0;
  const Tensor proto = letter_prototypes(cfg.seed, cfg.vocab_size, cfg.input_dim);
  for (const Utterance& u : synth_dataset(cfg)) {
    LabelSequence runs;
    for (int t = 0; t < u.features.rows(); ++t) {
      for (int k = 0; k < proto.rows(); ++k) {
        bool same = true;
        for (int d = 0; d < proto.cols(); ++d) same &= u.features.at(t, d) == proto.at(k, d);
        if (same) {
          if (runs.empty() || runs.back() != k + 1) runs.push_back(k + 1);
          break;
        }
      }
    }
    LabelSequence merged;
    for (int c : u.labels) {
      if (merged.empty() || merged.back() != c) merged.push_back(c);
    }
    EXPECT_EQ(runs, merged) << u.id;
  }
}

TEST(Synth, EveryUtteranceIsCtcFeasibleAtQuarterRate) {
  SynthConfig cfg;
  cfg.n_utts = 200;
  for (const Utterance& u : synth_dataset(cfg)) {
    EXPECT_GE(vgg_output_frames(u.features.rows()), ctc_min_frames(u.labels)) << u.id;
  }
}

TEST(Synth, RejectsBadConfigs) {
  const auto broken = [](auto mutate) {
    SynthConfig cfg;
    mutate(cfg);
    return cfg;
  };
  EXPECT_THROW(broken([](SynthConfig& c) { c.vocab_size = 1; }).validate(), ConfigError);
  EXPECT_THROW(broken([](SynthConfig& c) { c.len_min = 5, c.len_max = 4; }).validate(), ConfigError);
  EXPECT_THROW(broken([](SynthConfig& c) { c.dur_min = 1; }).validate(), ConfigError);
  EXPECT_THROW(broken([](SynthConfig& c) { c.noise_sigma = -0.1; }).validate(), ConfigError);
  EXPECT_THROW(broken([](SynthConfig& c) { c.dur_min = c.dur_max = 2; }).validate(), ConfigError);
  EXPECT_NO_THROW(SynthConfig{}.validate());
}

TEST(Dataset, SaveLoadRoundTrip) {
  const fs::path dir = scratch_dir("dataset");
  const Dataset data{4, synth_dataset(small_data(5))};
  save_dataset(dir.string(), data);
  const Dataset back = load_dataset(dir.string());
  EXPECT_EQ(back.vocab_size, 4);
  ASSERT_EQ(back.utterances.size(), data.utterances.size());
  for (std::size_t i = 0; i < back.utterances.size(); ++i) {
    EXPECT_EQ(back.utterances[i].id, data.utterances[i].id);
    EXPECT_EQ(back.utterances[i].labels, data.utterances[i].labels);
    for (std::size_t j = 0; j < data.utterances[i].features.size(); ++j) {
      EXPECT_EQ(back.utterances[i].features[j], data.utterances[i].features[j]);
    }
  }
  EXPECT_THROW(load_dataset((dir / "missing").string()), DataError);
}

// ---- config ----

TEST(Config, ParsesCommentsAndBlankLines) {
  std::istringstream in("# run\nlambda = 0.5\n\n  epochs=7  # inline\nstreams = blstm\n");
  const ConfigMap m = parse_config(in);
  EXPECT_EQ(m.at("lambda"), "0.5");
  EXPECT_EQ(m.at("epochs"), "7");
  RunConfig run;
  apply_config(m, run);
  EXPECT_EQ(run.train.lambda, 0.5);
  EXPECT_EQ(run.train.epochs, 7);
  EXPECT_EQ(run.train.model.streams, StreamMode::kFirstOnly);
}

TEST(Config, Errors) {
  std::istringstream dup("beam = 3\nbeam = 4\n");
  EXPECT_THROW(parse_config(dup), ConfigError);
  std::istringstream malformed("beam 3\n");
  EXPECT_THROW(parse_config(malformed), ConfigError);
  RunConfig run;
  EXPECT_THROW(apply_config({{"bogus", "1"}}, run), ConfigError);
  EXPECT_THROW(apply_config({{"beam", "wide"}}, run), ConfigError);
  EXPECT_THROW(apply_config({{"streams", "three"}}, run), ConfigError);
  EXPECT_THROW(read_config_file("/nonexistent/memr.cfg"), ConfigError);
}

TEST(Config, EveryTunableIsAddressable) {
  const std::map<std::string, std::string> values{
      {"lambda", "0.25"},      {"learning_rate", "0.002"}, {"epochs", "3"},        {"seed", "9"},
      {"clip_norm", "2"},      {"vocab", "5"},             {"input_dim", "7"},     {"hidden", "6"},
      {"blstm_layers", "1"},   {"vgg_channels1", "2"},     {"vgg_channels2", "3"}, {"vgg_recurrent_layers", "2"},
      {"attention_dim", "5"},  {"decoder_hidden", "4"},    {"embed", "3"},         {"streams", "vgg"},
      {"decode_lambda", "0.7"}, {"gamma", "0.4"},          {"beam", "8"},          {"max_len", "11"},
      {"data_seed", "12"},     {"split", "1"},             {"n_utts", "13"},       {"len_min", "1"},
      {"len_max", "3"},        {"dur_min", "4"},           {"dur_max", "6"},       {"noise_sigma", "0.4"},
      {"lm_hidden", "10"},     {"lm_embed", "6"},          {"lm_epochs", "4"},     {"lm_learning_rate", "0.01"},
      {"lm_seed", "14"}};
  EXPECT_EQ(values.size(), config_key_help().size());
  RunConfig run;
  apply_config(ConfigMap(values.begin(), values.end()), run);
  EXPECT_EQ(run.train.lambda, 0.25);
  EXPECT_EQ(run.train.learning_rate, 0.002);
  EXPECT_EQ(run.train.epochs, 3);
  EXPECT_EQ(run.train.seed, 9u);
  EXPECT_EQ(run.train.clip_norm, 2.0);
  EXPECT_EQ(run.train.model.num_letters, 5);
  EXPECT_EQ(run.train.model.encoder.input_dim, 7);
  EXPECT_EQ(run.train.model.encoder.hidden, 6);
  EXPECT_EQ(run.train.model.encoder.blstm_layers, 1);
  EXPECT_EQ(run.train.model.encoder.vgg_channels1, 2);
  EXPECT_EQ(run.train.model.encoder.vgg_channels2, 3);
  EXPECT_EQ(run.train.model.encoder.vgg_recurrent_layers, 2);
  EXPECT_EQ(run.train.model.attention_dim, 5);
  EXPECT_EQ(run.train.model.decoder_hidden, 4);
  EXPECT_EQ(run.train.model.embed, 3);
  EXPECT_EQ(run.train.model.streams, StreamMode::kSecondOnly);
  EXPECT_EQ(run.decode.lambda, 0.7);
  EXPECT_EQ(run.decode.gamma, 0.4);
  EXPECT_EQ(run.decode.beam_width, 8);
  EXPECT_EQ(run.decode.max_len, 11);
  EXPECT_EQ(run.data.seed, 12u);
  EXPECT_EQ(run.data.split, 1);
  EXPECT_EQ(run.data.n_utts, 13);
  EXPECT_EQ(run.data.len_min, 1);
  EXPECT_EQ(run.data.len_max, 3);
  EXPECT_EQ(run.data.dur_min, 4);
  EXPECT_EQ(run.data.dur_max, 6);
  EXPECT_EQ(run.data.noise_sigma, 0.4);
  EXPECT_EQ(run.lm.hidden, 10);
  EXPECT_EQ(run.lm.embed, 6);
  EXPECT_EQ(run.lm_train.epochs, 4);
  EXPECT_EQ(run.lm_train.learning_rate, 0.01);
  EXPECT_EQ(run.lm_train.seed, 14u);
}

// ---- checkpoints ----

TEST(Checkpoint, RoundTripIsBitExact) {
  const fs::path dir = scratch_dir("ckpt_roundtrip");
  const Model model = Model::init(small_model(4, 6), 5);
  save_model(model, (dir / "m.ckpt").string());
  const Model back = load_model((dir / "m.ckpt").string());
  const auto a = model.named_parameters(), b = back.named_parameters();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].first, b[i].first);
    EXPECT_EQ(a[i].second.shape(), b[i].second.shape());
    EXPECT_EQ(std::memcmp(a[i].second.data().data(), b[i].second.data().data(), a[i].second.size() * sizeof(double)),
              0);
  }
  save_model(back, (dir / "again.ckpt").string());
  EXPECT_EQ(read_bytes(dir / "m.ckpt"), read_bytes(dir / "again.ckpt"));
}

TEST(Checkpoint, SpecialValuesSurvive) {
  const fs::path dir = scratch_dir("ckpt_special");
  Tensor t({1, 4});
  t.mutable_data()[0] = -0.0;
  t.mutable_data()[1] = std::numeric_limits<double>::denorm_min();
  t.mutable_data()[2] = std::numeric_limits<double>::infinity();
  t.mutable_data()[3] = 1.0 / 3.0;
  checkpoint_save({{"x", t}, {"s", Tensor::scalar(2.5)}}, (dir / "x.ckpt").string());
  const NamedParams back = checkpoint_load((dir / "x.ckpt").string());
  ASSERT_EQ(back.size(), 2u);
  EXPECT_TRUE(std::signbit(back[0].second[0]));
  EXPECT_EQ(back[0].second[1], t[1]);
  EXPECT_EQ(back[0].second[2], t[2]);
  EXPECT_EQ(back[0].second[3], t[3]);
  EXPECT_EQ(back[1].second.rank(), 0);
  EXPECT_EQ(back[1].second.item(), 2.5);
}

TEST(Checkpoint, LanguageModelRoundTrip) {
  const fs::path dir = scratch_dir("ckpt_lm");
  Rng rng(3);
  const LanguageModel lm = LanguageModel::init(LmConfig{4, 3, 5}, rng);
  save_lm(lm, (dir / "lm.ckpt").string());
  const LanguageModel back = load_lm((dir / "lm.ckpt").string());
  const LabelSequence seq{1, 4, 2};
  EXPECT_EQ(lm.sequence_log_prob(seq).item(), back.sequence_log_prob(seq).item());
}

class CheckpointCorruption : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = scratch_dir("ckpt_corrupt");
    path_ = dir_ / "m.ckpt";
    save_model(Model::init(small_model(4, 6), 1), path_.string());
    bytes_ = read_bytes(path_);
  }
  fs::path dir_, path_;
  std::string bytes_;
};

TEST_F(CheckpointCorruption, BadMagicIsAFormatError) {
  std::string b = bytes_;
  b[0] = 'X';
  write_bytes(path_, b);
  EXPECT_THROW(checkpoint_load(path_.string()), CheckpointFormatError);
}

TEST_F(CheckpointCorruption, WrongVersion) {
  std::string b = bytes_;
  b[4] = 2;
  write_bytes(path_, b);
  EXPECT_THROW(checkpoint_load(path_.string()), CheckpointVersionError);
}

TEST_F(CheckpointCorruption, TruncationAnywhere) {
  for (std::size_t cut : {std::size_t{2}, std::size_t{6}, std::size_t{10}, bytes_.size() / 2, bytes_.size() - 1}) {
    write_bytes(path_, bytes_.substr(0, cut));
    EXPECT_THROW(checkpoint_load(path_.string()), CheckpointTruncatedError) << "cut at " << cut;
  }
}

TEST_F(CheckpointCorruption, TrailingBytes) {
  write_bytes(path_, bytes_ + "x");
  EXPECT_THROW(checkpoint_load(path_.string()), CheckpointFormatError);
}

TEST_F(CheckpointCorruption, MissingFile) {
  EXPECT_THROW(checkpoint_load((dir_ / "absent.ckpt").string()), CheckpointError);
}

TEST(Checkpoint, MismatchedConfigNamesTheParameter) {
  const fs::path dir = scratch_dir("ckpt_shape");
  save_model(Model::init(small_model(4, 6), 1), (dir / "m.ckpt").string());
  ModelConfig other = small_model(4, 6);
  other.embed = 5;
  try {
    load_model((dir / "m.ckpt").string(), other);
    FAIL() << "expected CheckpointShapeError";
  } catch (const CheckpointShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("dec.embedding"), std::string::npos) << e.what();
  }
}

// ---- evaluation ----

TEST(Cer, Examples) {
  const std::vector<LabelSequence> refs{{1, 2, 3}, {2, 2}};
  EXPECT_EQ(corpus_cer(refs, refs), 0.0);
  EXPECT_EQ(corpus_cer(refs, {{}, {}}), 1.0);
  EXPECT_DOUBLE_EQ(corpus_cer({{1, 2, 3}}, {{1, 2, 4}}), 1.0 / 3.0);
  EXPECT_THROW(corpus_cer(refs, {{}}), DataError);
}

TEST(Cer, EditDistance) {
  const auto d = [](LabelSequence a, LabelSequence b) { return edit_distance(a, b); };
  EXPECT_EQ(d({}, {}), 0);
  EXPECT_EQ(d({1, 2}, {}), 2);
  EXPECT_EQ(d({}, {3}), 1);
  EXPECT_EQ(d({1, 2, 3}, {2, 3}), 1);
  EXPECT_EQ(d({1, 2, 3}, {3, 2, 1}), 2);
  // kitten -> sitting
  EXPECT_EQ(d({11, 9, 20, 20, 5, 14}, {19, 9, 20, 20, 9, 14, 7}), 3);
}

TEST(Cer, EditDistanceIsAMetric) {
  Rng rng(8);
  const auto draw = [&] {
    LabelSequence s(rng.uniform_int(0, 6));
    for (int& c : s) c = rng.uniform_int(1, 3);
    return s;
  };
  for (int trial = 0; trial < 200; ++trial) {
    const LabelSequence a = draw(), b = draw(), c = draw();
    EXPECT_EQ(edit_distance(a, b), edit_distance(b, a));
    EXPECT_LE(edit_distance(a, c), edit_distance(a, b) + edit_distance(b, c));
    EXPECT_GE(edit_distance(a, b), std::abs(static_cast<int>(a.size()) - static_cast<int>(b.size())));
    EXPECT_LE(edit_distance(a, b), static_cast<int>(std::max(a.size(), b.size())));
  }
}

// ---- training ----

TEST(Train, EpochOneLossIsDeterministic) {
  TrainConfig cfg;
  cfg.model = small_model(4, 6);
  cfg.epochs = 1;
  const auto data = synth_dataset(small_data(8));
  const TrainResult a = train(cfg, data), b = train(cfg, data);
  EXPECT_EQ(a.history[0].mtl_loss, b.history[0].mtl_loss);
  cfg.seed = 2;
  EXPECT_NE(train(cfg, data).history[0].mtl_loss, a.history[0].mtl_loss);
}

TEST(Train, MemorizesOneUtterance) {
  TrainConfig cfg;
  cfg.model = small_model(4, 6);
  cfg.learning_rate = 1e-2;
  cfg.epochs = 300;
  const auto data = synth_dataset(small_data(1));
  const TrainResult r = train(cfg, data);
  EXPECT_LT(r.history.back().mtl_loss, 0.1);
}

TEST(Train, LossFallsOverTheFirstFiveEpochs) {
  TrainConfig cfg;
  cfg.epochs = 5;
  SynthConfig data_cfg;
  const TrainResult r = train(cfg, synth_dataset(data_cfg));
  ASSERT_EQ(r.history.size(), 5u);
  for (std::size_t i = 1; i < r.history.size(); ++i) {
    EXPECT_LT(r.history[i].mtl_loss, r.history[i - 1].mtl_loss) << "epoch " << i + 1;
  }
}

TEST(Train, MetricsMarkInactiveBranches) {
  TrainConfig cfg;
  cfg.model = small_model(4, 6);
  cfg.model.streams = StreamMode::kFirstOnly;
  cfg.lambda = 1.0;
  cfg.epochs = 1;
  const TrainResult r = train(cfg, synth_dataset(small_data(3)));
  EXPECT_TRUE(std::isfinite(r.history[0].ctc1));
  EXPECT_TRUE(std::isnan(r.history[0].ctc2));
  EXPECT_TRUE(std::isnan(r.history[0].att));
  std::ostringstream csv;
  write_metrics_csv(csv, r.history);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "epoch,mtl_loss,ctc1,ctc2,att");
}

TEST(Train, NonFiniteFeaturesNameEpochAndUtterance) {
  TrainConfig cfg;
  cfg.model = small_model(4, 6);
  cfg.epochs = 1;
  auto data = synth_dataset(small_data(3));
  data[1].features.mutable_data()[0] = std::nan("");
  try {
    train(cfg, data);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("epoch 1"), std::string::npos) << msg;
    EXPECT_NE(msg.find(data[1].id), std::string::npos) << msg;
  }
}

TEST(Train, RejectsBadInputs) {
  TrainConfig cfg;
  cfg.model = small_model(4, 6);
  EXPECT_THROW(train(cfg, {}), DataError);
  SynthConfig wide = small_data(2);
  wide.input_dim = 7;
  EXPECT_THROW(train(cfg, synth_dataset(wide)), DataError);
  cfg.lambda = 2;
  EXPECT_THROW(train(cfg, synth_dataset(small_data(2))), ConfigError);
}

// ---- command line ----

class Cli : public ::testing::Test {
 protected:
  void SetUp() override { dir_ = scratch_dir("cli"); }

  int run(const std::string& args) {
    const std::string cmd = std::string(MEMR_CLI_PATH) + " " + args + " > " + (dir_ / "stdout.txt").string() +
                            " 2> " + (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  std::string out() const { return read_bytes(dir_ / "stdout.txt"); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(Cli, UsageErrorsAreConfigErrors) {
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("gen --seed 1"), 2);
  EXPECT_EQ(run("gen --seed 1 --vocab 4 --n 3 --sigma -1 --out " + path("d")), 2);
  write_bytes(path("bad.cfg"), "nonsense = 1\n");
  EXPECT_EQ(run("gen --seed 1 --vocab 4 --n 3 --config " + path("bad.cfg") + " --out " + path("d")), 2);
}

TEST_F(Cli, MissingDataIsADataError) {
  EXPECT_EQ(run("train --data " + path("nowhere") + " --out " + path("m.ckpt")), 3);
  write_bytes(path("ref.txt"), "u1\ta b\nu2\tc\n");
  write_bytes(path("hyp.txt"), "u1\ta b\n");
  EXPECT_EQ(run("eval --ref " + path("ref.txt") + " --hyp " + path("hyp.txt")), 3);
}

TEST_F(Cli, CorruptModelIsADataError) {
  write_bytes(path("m.ckpt"), "not a checkpoint");
  ASSERT_EQ(run("gen --seed 1 --vocab 4 --n 2 --out " + path("d")), 0);
  EXPECT_EQ(run("decode --model " + path("m.ckpt") + " --data " + path("d") + " --out " + path("hyp.txt")), 3);
}

TEST_F(Cli, EvalScoresHypothesisFiles) {
  write_bytes(path("ref.txt"), "u1\ta b c\n");
  write_bytes(path("hyp.txt"), "u1\ta b d\n");
  ASSERT_EQ(run("eval --ref " + path("ref.txt") + " --hyp " + path("hyp.txt")), 0);
  EXPECT_EQ(out().substr(0, 4), "CER\t");
  EXPECT_NEAR(std::stod(out().substr(4)), 1.0 / 3.0, 1e-6);
}

TEST_F(Cli, NumericFailureExitsFour) {
  Dataset data{4, synth_dataset(small_data(2))};
  data.utterances[0].features.mutable_data()[3] = std::nan("");
  save_dataset(path("d"), data);
  write_bytes(path("c.cfg"), "epochs = 1\nhidden = 4\nblstm_layers = 1\nvgg_channels1 = 2\nvgg_channels2 = 2\n");
  EXPECT_EQ(run("train --config " + path("c.cfg") + " --data " + path("d") + " --out " + path("m.ckpt")), 4);
}

TEST_F(Cli, GenTrainDecodeEvalPipeline) {
  ASSERT_EQ(run("gen --seed 3 --vocab 4 --n 4 --out " + path("d")), 0);
  ASSERT_EQ(run("gen --seed 3 --vocab 4 --n 4 --out " + path("d2")), 0);
  EXPECT_EQ(read_bytes(path("d") + "/features.ckpt"), read_bytes(path("d2") + "/features.ckpt"));
  EXPECT_EQ(read_bytes(path("d") + "/labels.txt"), read_bytes(path("d2") + "/labels.txt"));

  write_bytes(path("c.cfg"),
              "epochs = 2\nhidden = 6\nblstm_layers = 1\nvgg_channels1 = 2\nvgg_channels2 = 2\n"
              "attention_dim = 4\ndecoder_hidden = 6\nembed = 3\nlm_epochs = 2\n");
  ASSERT_EQ(run("train --config " + path("c.cfg") + " --data " + path("d") + " --out " + path("m.ckpt")), 0);
  EXPECT_TRUE(fs::exists(path("m.ckpt.metrics.csv")));
  ASSERT_EQ(run("lm-train --config " + path("c.cfg") + " --data " + path("d") + " --out " + path("lm.ckpt")), 0);
  ASSERT_EQ(run("decode --model " + path("m.ckpt") + " --lm " + path("lm.ckpt") + " --gamma 0.3 --data " +
                path("d") + " --out " + path("hyp.txt")),
            0);
  EXPECT_TRUE(fs::exists(path("hyp.txt")));
  EXPECT_TRUE(fs::is_directory(path("hyp.txt.nbest")));
  ASSERT_EQ(run("eval --ref " + path("d") + "/labels.txt --hyp " + path("hyp.txt")), 0);
  EXPECT_EQ(out().substr(0, 4), "CER\t");
}

}  // namespace
}  // namespace memr
