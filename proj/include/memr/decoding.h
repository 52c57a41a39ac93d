// include/memr/decoding.h
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

#include <array>
#include <iosfwd>
#include <vector>

#include "memr/attention.h"
#include "memr/ctc.h"
#include "memr/lm.h"

namespace memr {

struct DecodeConfig {
  double lambda = 0.3;  // CTC weight
  double gamma = 0.0;   // LM weight
  int beam_width = 5;
  int max_len = 20;     // longest letter sequence considered

  void validate() const;
};

struct Hypothesis {
  LabelSequence prefix;
  DecoderState att_state;
  std::array<PrefixScoreState, 2> ctc_states;  // per encoder; inactive streams stay empty
  LmState lm_state;
  double score = 0;     // lambda * ctc_part + (1 - lambda) * att_part + gamma * lm_part
  double ctc_part = 0;  // stream-averaged CTC prefix log score
  double att_part = 0;
  double lm_part = 0;
  bool finished = false;
};

struct DecodeResult {
  LabelSequence best;
  double score = 0;
  std::vector<Hypothesis> nbest;  // finished hypotheses, best first
  bool truncated = false;         // best hypothesis hit max_len
};

// Everything the joint objective reads for one utterance. Pointers are
// non-owning; `lm` may be null, in which case LM scores are zero.
struct DecodeInputs {
  const EncoderOutputs* enc = nullptr;
  std::array<Tensor, 2> ctc_log_posteriors;  // per stream, undefined if inactive
  const DecoderParams* decoder = nullptr;
  StreamMode mode = StreamMode::kBoth;
  const LanguageModel* lm = nullptr;
};

// w * x with 0 * (-inf) taken as 0, so a zero-weighted objective term can
// never poison a score.
double weighted(double weight, double value);

// Ranking used everywhere a best sequence is chosen: higher score first,
// then shorter, then lexicographically smaller.
bool better(double score_a, const LabelSequence& a, double score_b, const LabelSequence& b);

// Label-synchronous beam search over the joint CTC / attention / LM score.
// Every live hypothesis is extended by each letter and by eos; the best
// beam_width candidates survive and those ending in eos move to the finished
// pool. At step max_len only eos is allowed, so every sequence of up to
// max_len letters can finish.
DecodeResult joint_beam_search(const DecodeInputs& inputs, const DecodeConfig& cfg);

struct SequenceScore {
  double total = 0;
  double ctc = 0;
  double att = 0;
  double lm = 0;
};

// Full-sequence joint objective of one complete hypothesis.
SequenceScore score_sequence(const DecodeInputs& inputs, std::span<const int> labels, const DecodeConfig& cfg);

// Scores every sequence of at most max_len letters; SizeError when
// (K + 1)^max_len exceeds 1e6.
LabelSequence exhaustive_search(const DecodeInputs& inputs, const DecodeConfig& cfg);

// One line per finished hypothesis: "score<TAB>a b c".
void write_nbest(std::ostream& os, const DecodeResult& result, const Vocabulary& vocab);

}  // namespace memr
