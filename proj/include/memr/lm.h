// include/memr/lm.h
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

#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "memr/ctc.h"
#include "memr/layers.h"

namespace memr {

struct LmConfig {
  int num_letters = 6;
  int embed = 32;
  int hidden = 64;
};

// Recurrent state plus the distribution over the next symbol (eos + letters)
// it implies, so scoring a candidate is a lookup.
struct LmState {
  LstmState lstm;
  std::vector<double> next_log_probs;
  int last = kSos;
};

// Character-level LSTM language model over letters with an end symbol.
class LanguageModel {
 public:
  static LanguageModel init(const LmConfig& cfg, Rng& rng);

  const LmConfig& config() const { return config_; }
  NamedParams named_parameters() const;

  LmState initial_state() const;
  // Returns the state after consuming `letter` and log p(letter | history).
  // Consuming kEos leaves the recurrent state unchanged.
  std::pair<LmState, double> score_extend(const LmState& state, int letter) const;
  // Differentiable log p(labels, eos).
  Tensor sequence_log_prob(std::span<const int> labels) const;

 private:
  LanguageModel() = default;
  Tensor step_log_probs(const LstmState& prev, int symbol, LstmState& next) const;

  LmConfig config_;
  Tensor embedding_;  // [(K + 1) x embed], row 0 is sos
  RecurrentCell cell_;
  Linear output_;     // hidden -> K + 1, column 0 is eos
};

std::pair<LmState, double> lm_score_extend(const LanguageModel& lm, const LmState& state, int letter);

struct LmTrainConfig {
  int epochs = 20;
  double learning_rate = 3e-3;
  std::uint64_t seed = 1;
};

struct LmTrainResult {
  LanguageModel model;
  double perplexity = 0;  // per predicted symbol (letters and eos) on the corpus after training
  std::vector<double> epoch_loss;
};

LmTrainResult lm_train(const std::vector<LabelSequence>& corpus, const LmConfig& cfg, const LmTrainConfig& train);

// exp(mean negative log-likelihood per predicted symbol).
double lm_perplexity(const LanguageModel& lm, const std::vector<LabelSequence>& corpus);

}  // namespace memr
