// tests/test_lm.cc
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

#include "memr/errors.h"
#include "memr/lm.h"
#include "memr/ops.h"

namespace memr {
namespace {

std::vector<LabelSequence> uniform_corpus(int n, int letters, Rng& rng) {
  std::vector<LabelSequence> out;
  for (int i = 0; i < n; ++i) {
    LabelSequence s(rng.uniform_int(1, 6));
    for (int& c : s) c = rng.uniform_int(1, letters);
    out.push_back(s);
  }
  return out;
}

TEST(LanguageModel, StepDistributionsNormalize) {
  Rng rng(1);
  const LanguageModel lm = LanguageModel::init(LmConfig{5, 4, 6}, rng);
  LmState s = lm.initial_state();
  for (int c : {3, 1, 5, 5, 2}) {
    EXPECT_EQ(s.next_log_probs.size(), 6u);
    EXPECT_NEAR(log_sum_exp(s.next_log_probs), 0.0, 1e-9);
    s = lm_score_extend(lm, s, c).first;
  }
}

TEST(LanguageModel, ExtendsComposeToSequenceLogProb) {
  Rng rng(2);
  const LanguageModel lm = LanguageModel::init(LmConfig{4, 3, 5}, rng);
  const LabelSequence seq{2, 4, 4, 1};
  LmState s = lm.initial_state();
  double total = 0;
  for (int c : seq) {
    auto [next, lp] = lm.score_extend(s, c);
    total += lp;
    s = next;
  }
  const double lp = lm.score_extend(s, kEos).second;
  total += lp;
  EXPECT_NEAR(lm.sequence_log_prob(seq).item(), total, 1e-12);
}

TEST(LanguageModel, OutOfVocabulary) {
  Rng rng(3);
  const LanguageModel lm = LanguageModel::init(LmConfig{3, 3, 4}, rng);
  EXPECT_THROW(lm.score_extend(lm.initial_state(), 4), VocabularyError);
  EXPECT_THROW(lm.score_extend(lm.initial_state(), -1), VocabularyError);
}

TEST(LmTrain, LearnsADeterministicSuccessor) {
  // Every b is immediately followed by a.
  Rng rng(4);
  std::vector<LabelSequence> corpus;
  for (int i = 0; i < 100; ++i) {
    LabelSequence s;
    const int n = rng.uniform_int(1, 4);
    for (int j = 0; j < n; ++j) {
      const int c = rng.uniform_int(1, 3);
      s.push_back(c);
      if (c == 2) s.push_back(1);
    }
    corpus.push_back(s);
  }
  const LmTrainResult r = lm_train(corpus, LmConfig{3, 8, 16}, LmTrainConfig{});
  for (const LabelSequence& history : {LabelSequence{2}, LabelSequence{3, 1, 2}, LabelSequence{1, 2, 1, 3, 2}}) {
    LmState s = r.model.initial_state();
    for (int c : history) s = r.model.score_extend(s, c).first;
    EXPECT_GT(std::exp(s.next_log_probs[1]), 0.9);
  }
}

TEST(LmTrain, RepeatedSequenceIsAlmostCertain) {
  const std::vector<LabelSequence> corpus(20, LabelSequence{1, 3, 2, 2});
  const LmTrainResult r = lm_train(corpus, LmConfig{3, 8, 16}, LmTrainConfig{});
  EXPECT_LT(r.perplexity, 1.05);
  EXPECT_NEAR(r.perplexity, lm_perplexity(r.model, corpus), 1e-12);
  ASSERT_EQ(r.epoch_loss.size(), 20u);
  EXPECT_LT(r.epoch_loss.back(), r.epoch_loss.front());
}

TEST(LmTrain, UniformCorpusSitsBetweenEntropyAndCeiling) {
  // Lengths uniform on 1..6, letters uniform on 4: the best achievable
  // per-symbol perplexity is exp((3.5 ln 4 + ln 6) / 4.5).
  Rng rng(5);
  const auto train = uniform_corpus(300, 4, rng), held_out = uniform_corpus(300, 4, rng);
  LmTrainConfig tc;
  tc.epochs = 10;
  const LmTrainResult r = lm_train(train, LmConfig{4, 16, 32}, tc);
  const double entropy_bound = std::exp((3.5 * std::log(4.0) + std::log(6.0)) / 4.5);
  const double ppl = lm_perplexity(r.model, held_out);
  EXPECT_GT(ppl, entropy_bound - 0.05);
  EXPECT_LT(ppl, 5.0);
}

TEST(LmTrain, DeterministicGivenSeed) {
  Rng rng(6);
  const auto corpus = uniform_corpus(30, 3, rng);
  LmTrainConfig tc;
  tc.epochs = 2;
  const LmTrainResult a = lm_train(corpus, LmConfig{3, 4, 6}, tc);
  const LmTrainResult b = lm_train(corpus, LmConfig{3, 4, 6}, tc);
  EXPECT_EQ(a.perplexity, b.perplexity);
  const auto pa = a.model.named_parameters(), pb = b.model.named_parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    for (std::size_t j = 0; j < pa[i].second.size(); ++j) EXPECT_EQ(pa[i].second[j], pb[i].second[j]);
  }
}

TEST(LmTrain, EmptyCorpusIsAnError) {
  EXPECT_THROW(lm_train({}, LmConfig{}, LmTrainConfig{}), ContractError);
}

}  // namespace
}  // namespace memr
