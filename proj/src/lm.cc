// src/lm.cc
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

#include "memr/lm.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "memr/errors.h"
#include "memr/ops.h"
#include "memr/optimizer.h"

namespace memr {

LanguageModel LanguageModel::init(const LmConfig& cfg, Rng& rng) {
  if (cfg.num_letters < 1 || cfg.embed < 1 || cfg.hidden < 1) throw ConfigError("LM widths must be positive");
  LanguageModel lm;
  lm.config_ = cfg;
  lm.embedding_ = uniform({cfg.num_letters + 1, cfg.embed}, -1.0, 1.0, rng).set_requires_grad(true);
  lm.cell_ = RecurrentCell::init(cfg.embed, cfg.hidden, rng);
  lm.output_ = Linear::init(cfg.hidden, cfg.num_letters + 1, rng);
  return lm;
}

NamedParams LanguageModel::named_parameters() const {
  NamedParams out;
  out.emplace_back("lm.embedding", embedding_);
  cell_.collect("lm.lstm", out);
  output_.collect("lm.output", out);
  return out;
}

Tensor LanguageModel::step_log_probs(const LstmState& prev, int symbol, LstmState& next) const {
  next = lstm_cell_step(cell_, slice_rows(embedding_, symbol, symbol + 1), prev);
  return log_softmax_rows(output_.forward(next.h));
}

LmState LanguageModel::initial_state() const {
  NoGradScope no_grad;
  LmState state;
  const Tensor lp = step_log_probs(LstmState::zeros(config_.hidden), kSos, state.lstm);
  state.next_log_probs.assign(lp.data().begin(), lp.data().end());
  state.last = kSos;
  return state;
}

std::pair<LmState, double> LanguageModel::score_extend(const LmState& state, int letter) const {
  if (letter < 0 || letter > config_.num_letters) {
    throw VocabularyError("LM: symbol " + std::to_string(letter) + " outside eos + " +
                          std::to_string(config_.num_letters) + " letters");
  }
  const double score = state.next_log_probs[letter];
  if (letter == kEos) return {state, score};
  NoGradScope no_grad;
  LmState next;
  const Tensor lp = step_log_probs(state.lstm, letter, next.lstm);
  next.next_log_probs.assign(lp.data().begin(), lp.data().end());
  next.last = letter;
  return {std::move(next), score};
}

Tensor LanguageModel::sequence_log_prob(std::span<const int> labels) const {
  LstmState state = LstmState::zeros(config_.hidden);
  int prev = kSos;
  std::vector<Tensor> picks;
  for (std::size_t l = 0; l <= labels.size(); ++l) {
    const int target = l < labels.size() ? labels[l] : kEos;
    if (l < labels.size() && (target < 1 || target > config_.num_letters)) {
      throw VocabularyError("LM: label " + std::to_string(target) + " is not a letter");
    }
    LstmState next;
    const Tensor lp = step_log_probs(state, prev, next);
    const int index[] = {target};
    picks.push_back(gather(lp, index, {1, 1}));
    state = std::move(next);
    prev = target;
  }
  return sum(concat_cols(picks));
}

std::pair<LmState, double> lm_score_extend(const LanguageModel& lm, const LmState& state, int letter) {
  return lm.score_extend(state, letter);
}

double lm_perplexity(const LanguageModel& lm, const std::vector<LabelSequence>& corpus) {
  NoGradScope no_grad;
  double nll = 0;
  std::size_t count = 0;
  for (const auto& seq : corpus) {
    nll -= lm.sequence_log_prob(seq).item();
    count += seq.size() + 1;
  }
  return std::exp(nll / static_cast<double>(count));
}

LmTrainResult lm_train(const std::vector<LabelSequence>& corpus, const LmConfig& cfg, const LmTrainConfig& train) {
  if (corpus.empty()) throw ContractError("lm_train: empty corpus");
  if (train.epochs < 1 || train.learning_rate <= 0) throw ConfigError("lm_train: epochs and learning rate must be positive");
  Rng rng(train.seed);
  LmTrainResult result{LanguageModel::init(cfg, rng), 0.0, {}};
  std::vector<Tensor> params;
  for (auto& [name, t] : result.model.named_parameters()) params.push_back(t);
  Adam adam(params, AdamConfig{.learning_rate = train.learning_rate});

  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < train.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng.engine());
    double total = 0;
    for (std::size_t i : order) {
      Tape tape;
      Tensor loss;
      {
        TapeScope scope(tape);
        loss = scale(result.model.sequence_log_prob(corpus[i]), -1.0);
      }
      tape.backward(loss);
      adam.step();
      total += loss.item();
    }
    result.epoch_loss.push_back(total / static_cast<double>(corpus.size()));
  }
  result.perplexity = lm_perplexity(result.model, corpus);
  return result;
}

}  // namespace memr
