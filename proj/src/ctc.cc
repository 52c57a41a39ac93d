// src/ctc.cc
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

#include "memr/ctc.h"

#include <cmath>
#include <limits>

#include "memr/errors.h"
#include "memr/ops.h"

namespace memr {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_posteriors(const Tensor& log_posteriors, std::span<const int> labels) {
  if (log_posteriors.rank() != 2 || log_posteriors.cols() < 2) {
    throw DimensionError("ctc: log posteriors must be [T' x (K + 1)], got " +
                         shape_to_string(log_posteriors.shape()));
  }
  const int v = log_posteriors.cols();
  for (int c : labels) {
    if (c <= kBlank || c >= v) {
      throw VocabularyError("ctc: label " + std::to_string(c) + " outside letters 1.." + std::to_string(v - 1));
    }
  }
}

double subtract_log(double a, double b) { return b == kNegInf ? kNegInf : a - b; }

}  // namespace

Vocabulary::Vocabulary(int num_letters) : num_letters_(num_letters) {
  if (num_letters < 1 || num_letters > 26) throw ConfigError("vocabulary needs 1..26 letters");
}

void Vocabulary::check_letter(int index) const {
  if (!is_letter(index)) {
    throw VocabularyError("symbol " + std::to_string(index) + " is not a letter of a " +
                          std::to_string(num_letters_) + "-letter vocabulary");
  }
}

char Vocabulary::symbol(int letter) const {
  check_letter(letter);
  return static_cast<char>('a' + letter - 1);
}

int Vocabulary::index_of(char symbol) const {
  const int index = symbol - 'a' + 1;
  if (!is_letter(index)) throw VocabularyError(std::string("unknown letter '") + symbol + "'");
  return index;
}

std::string Vocabulary::format(std::span<const int> labels) const {
  std::string out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) out += ' ';
    out += symbol(labels[i]);
  }
  return out;
}

LabelSequence Vocabulary::parse(std::string_view text) const {
  LabelSequence labels;
  for (char ch : text) {
    if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n') continue;
    labels.push_back(index_of(ch));
  }
  return labels;
}

int ctc_min_frames(std::span<const int> labels) {
  int frames = static_cast<int>(labels.size());
  for (std::size_t i = 1; i < labels.size(); ++i) {
    if (labels[i] == labels[i - 1]) ++frames;
  }
  return frames;
}

CtcResult ctc_log_likelihood(const Tensor& log_posteriors, std::span<const int> labels) {
  check_posteriors(log_posteriors, labels);
  const int t_len = log_posteriors.rows();
  const int v = log_posteriors.cols();
  if (t_len < ctc_min_frames(labels)) return CtcResult{Tensor::scalar(kNegInf), false};

  // Blank-extended label sequence: blank, c1, blank, c2, ..., cL, blank.
  const int states = 2 * static_cast<int>(labels.size()) + 1;
  std::vector<int> ext(states, kBlank);
  for (std::size_t l = 0; l < labels.size(); ++l) ext[2 * l + 1] = labels[l];

  std::vector<int> from_prev(states, -1);
  std::vector<int> from_skip(states, -1);
  bool any_skip = false;
  for (int s = 1; s < states; ++s) from_prev[s] = s - 1;
  for (int s = 2; s < states; ++s) {
    if (ext[s] != kBlank && ext[s] != ext[s - 2]) {
      from_skip[s] = s - 2;
      any_skip = true;
    }
  }

  std::vector<int> index(states);
  for (int s = 0; s < states; ++s) index[s] = s < 2 ? ext[s] : -1;
  Tensor alpha = gather(log_posteriors, index, {1, states}, kNegInf);
  for (int t = 1; t < t_len; ++t) {
    for (int s = 0; s < states; ++s) index[s] = t * v + ext[s];
    const Tensor emit = gather(log_posteriors, index, {1, states});
    Tensor arrive = log_add_exp(alpha, gather(alpha, from_prev, {1, states}, kNegInf));
    if (any_skip) arrive = log_add_exp(arrive, gather(alpha, from_skip, {1, states}, kNegInf));
    alpha = emit + arrive;
  }

  std::vector<int> last = {states - 1};
  if (states > 1) last.push_back(states - 2);
  const Tensor ends = gather(alpha, last, {1, static_cast<int>(last.size())});
  return CtcResult{logsumexp_all(ends), true};
}

double ctc_brute_force(const Tensor& log_posteriors, std::span<const int> labels) {
  check_posteriors(log_posteriors, labels);
  const int t_len = log_posteriors.rows();
  const int v = log_posteriors.cols();
  double paths = 1;
  for (int t = 0; t < t_len; ++t) {
    paths *= v;
    if (paths > 1e7) throw SizeError("ctc_brute_force: more than 1e7 alignment paths");
  }

  const auto lp = log_posteriors.data();
  const LabelSequence target(labels.begin(), labels.end());
  std::vector<int> path(t_len, 0);
  double total = kNegInf;
  while (true) {
    if (greedy_collapse(path) == target) {
      double score = 0;
      for (int t = 0; t < t_len; ++t) score += lp[static_cast<std::size_t>(t) * v + path[t]];
      total = log_add_exp(total, score);
    }
    int t = t_len - 1;
    while (t >= 0 && ++path[t] == v) path[t--] = 0;
    if (t < 0) break;
  }
  return total;
}

CtcResult joint_ctc_log_likelihood(const CtcResult& first, const CtcResult& second) {
  if (!first.feasible || !second.feasible) return CtcResult{Tensor::scalar(kNegInf), false};
  return CtcResult{scale(add(first.log_likelihood, second.log_likelihood), 0.5), true};
}

LabelSequence greedy_collapse(std::span<const int> path) {
  LabelSequence out;
  int prev = -1;
  for (int sym : path) {
    if (sym != prev && sym != kBlank) out.push_back(sym);
    prev = sym;
  }
  return out;
}

PrefixScoreState ctc_prefix_initial(const Tensor& log_posteriors) {
  check_posteriors(log_posteriors, {});
  const int t_len = log_posteriors.rows();
  const int v = log_posteriors.cols();
  PrefixScoreState state;
  state.frames = t_len;
  state.log_nonblank.assign(t_len, kNegInf);
  state.log_blank.assign(t_len, kNegInf);
  double acc = 0;
  for (int t = 0; t < t_len; ++t) {
    acc += log_posteriors[static_cast<std::size_t>(t) * v + kBlank];
    state.log_blank[t] = acc;
  }
  return state;
}

std::pair<PrefixScoreState, double> ctc_prefix_score_extend(const PrefixScoreState& state, int letter,
                                                            const Tensor& log_posteriors) {
  const int v = log_posteriors.cols();
  if (letter < 0 || letter >= v) {
    throw VocabularyError("ctc prefix: symbol " + std::to_string(letter) + " outside 0.." + std::to_string(v - 1));
  }
  if (state.closed) throw ContractError("ctc prefix: extending a closed prefix");
  const int t_len = state.frames;
  if (log_posteriors.rows() != t_len) {
    throw DimensionError("ctc prefix: state built for " + std::to_string(t_len) + " frames, posteriors have " +
                         std::to_string(log_posteriors.rows()));
  }

  if (letter == kEos) {
    PrefixScoreState closed = state;
    closed.closed = true;
    const double full = log_add_exp(state.log_nonblank[t_len - 1], state.log_blank[t_len - 1]);
    return {std::move(closed), subtract_log(full, state.prefix_score)};
  }

  auto lp = [&](int t, int sym) { return log_posteriors[static_cast<std::size_t>(t) * v + sym]; };
  const bool empty_prefix = state.last_letter == kBlank;

  PrefixScoreState next;
  next.frames = t_len;
  next.last_letter = letter;
  next.log_nonblank.assign(t_len, kNegInf);
  next.log_blank.assign(t_len, kNegInf);
  next.log_nonblank[0] = empty_prefix ? lp(0, letter) : kNegInf;
  double psi = next.log_nonblank[0];
  for (int t = 1; t < t_len; ++t) {
    // Mass that may emit `letter` fresh at frame t: alignments of the prefix
    // ending in blank, or in a different letter.
    const double phi = letter == state.last_letter ? state.log_blank[t - 1]
                                                   : log_add_exp(state.log_blank[t - 1], state.log_nonblank[t - 1]);
    next.log_nonblank[t] = log_add_exp(next.log_nonblank[t - 1], phi) + lp(t, letter);
    next.log_blank[t] = log_add_exp(next.log_blank[t - 1], next.log_nonblank[t - 1]) + lp(t, kBlank);
    psi = log_add_exp(psi, phi + lp(t, letter));
  }
  next.prefix_score = psi;
  const double increment = subtract_log(psi, state.prefix_score);
  return {std::move(next), increment};
}

}  // namespace memr
