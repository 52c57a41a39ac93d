// include/memr/ctc.h
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

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "memr/tensor.h"

namespace memr {

// Letter indices are 1..K in every symbol space. Index 0 is reserved and
// means "blank" in CTC posteriors and "end of sentence" in decoder and LM
// distributions; as a decoder input it is the start-of-sentence symbol.
inline constexpr int kBlank = 0;
inline constexpr int kEos = 0;
inline constexpr int kSos = 0;

using LabelSequence = std::vector<int>;

class Vocabulary {
 public:
  explicit Vocabulary(int num_letters);

  int num_letters() const { return num_letters_; }
  // Width of CTC posteriors (blank + letters) and of decoder outputs
  // (eos + letters).
  int size() const { return num_letters_ + 1; }

  bool is_letter(int index) const { return index >= 1 && index <= num_letters_; }
  void check_letter(int index) const;  // throws VocabularyError

  // Letters print as 'a', 'b', ...
  char symbol(int letter) const;
  int index_of(char symbol) const;
  // "a b c" <-> {1, 2, 3}
  std::string format(std::span<const int> labels) const;
  LabelSequence parse(std::string_view text) const;

 private:
  int num_letters_;
};

// Minimum frames a CTC alignment of `labels` needs: L plus one blank between
// each pair of equal adjacent letters.
int ctc_min_frames(std::span<const int> labels);

// CTC log-likelihood with a feasibility flag. Infeasible inputs carry a -inf
// value and no tape history.
struct CtcResult {
  Tensor log_likelihood;  // scalar
  bool feasible = true;

  double value() const { return log_likelihood.item(); }
};

// log sum over alignments collapsing to `labels` of prod_t p(z_t | X), by a
// log-domain forward recursion. Differentiable w.r.t. `log_posteriors`
// [T' x (K + 1)], column 0 being blank.
CtcResult ctc_log_likelihood(const Tensor& log_posteriors, std::span<const int> labels);

// Enumerates all (K + 1)^T' alignment paths. Throws SizeError beyond 1e7.
double ctc_brute_force(const Tensor& log_posteriors, std::span<const int> labels);

// Per-encoder CTC combination: the average of both log-likelihoods.
CtcResult joint_ctc_log_likelihood(const CtcResult& first, const CtcResult& second);

// Merge adjacent repeats, then drop blanks.
LabelSequence greedy_collapse(std::span<const int> path);

// Prefix probability bookkeeping for label-synchronous decoding. For the
// current prefix g it holds, per frame t, the log-probability of all partial
// alignments of frames 0..t that collapse to g and end in a non-blank
// (log_nonblank) or in a blank (log_blank).
struct PrefixScoreState {
  std::vector<double> log_nonblank;
  std::vector<double> log_blank;
  double prefix_score = 0.0;  // log of the total mass of alignments starting with g
  int last_letter = kBlank;   // kBlank for the empty prefix
  int frames = 0;             // T'
  bool closed = false;        // end of sentence consumed
};

PrefixScoreState ctc_prefix_initial(const Tensor& log_posteriors);

// Extends the prefix by `letter` and returns the new state with the score
// increment log psi(g + letter) - log psi(g). `letter == kEos` closes the
// prefix: the increment becomes log p_ctc(g) - log psi(g), so increments
// summed over a full sequence plus its closure give ctc_log_likelihood.
std::pair<PrefixScoreState, double> ctc_prefix_score_extend(const PrefixScoreState& state, int letter,
                                                            const Tensor& log_posteriors);

}  // namespace memr
