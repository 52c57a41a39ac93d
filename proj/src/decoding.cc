// src/decoding.cc
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

#include "memr/decoding.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "memr/errors.h"
#include "memr/ops.h"

namespace memr {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool stream_active(StreamMode mode, int stream) {
  return mode == StreamMode::kBoth || (stream == 0 && mode == StreamMode::kFirstOnly) ||
         (stream == 1 && mode == StreamMode::kSecondOnly);
}

int num_letters(const DecodeInputs& in) { return in.decoder->num_letters(); }

void check_inputs(const DecodeInputs& in) {
  if (!in.enc || !in.decoder) throw ContractError("decode: encoder outputs and decoder are required");
  for (int s = 0; s < 2; ++s) {
    if (stream_active(in.mode, s) && !in.ctc_log_posteriors[s].defined()) {
      throw ContractError("decode: missing CTC posteriors for stream " + std::to_string(s + 1));
    }
  }
  if (in.lm && in.lm->config().num_letters != num_letters(in)) {
    throw ConfigError("decode: LM and recognizer vocabularies differ");
  }
}

// Averaged CTC increment of extending by `symbol` (kEos closes).
double ctc_increment(const DecodeInputs& in, const Hypothesis& hyp, int symbol,
                     std::array<PrefixScoreState, 2>& next_states) {
  double total = 0;
  int active = 0;
  for (int s = 0; s < 2; ++s) {
    if (!stream_active(in.mode, s)) continue;
    auto [state, inc] = ctc_prefix_score_extend(hyp.ctc_states[s], symbol, in.ctc_log_posteriors[s]);
    next_states[s] = std::move(state);
    total += inc;
    ++active;
  }
  return total / active;
}

double combine(const DecodeConfig& cfg, double ctc, double att, double lm) {
  return weighted(cfg.lambda, ctc) + weighted(1.0 - cfg.lambda, att) + weighted(cfg.gamma, lm);
}

}  // namespace

void DecodeConfig::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("decode: lambda must lie in [0, 1]");
  if (!(gamma >= 0.0)) throw ConfigError("decode: gamma must be non-negative");
  if (beam_width < 1) throw ConfigError("decode: beam width must be at least 1");
  if (max_len < 1) throw ConfigError("decode: max_len must be at least 1");
}

double weighted(double weight, double value) { return weight == 0.0 ? 0.0 : weight * value; }

bool better(double score_a, const LabelSequence& a, double score_b, const LabelSequence& b) {
  if (score_a != score_b) return score_a > score_b;
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

DecodeResult joint_beam_search(const DecodeInputs& inputs, const DecodeConfig& cfg) {
  cfg.validate();
  check_inputs(inputs);
  NoGradScope no_grad;
  const int k = num_letters(inputs);
  const AttentionMemory memory(*inputs.enc, *inputs.decoder, inputs.mode);

  Hypothesis root;
  root.att_state = DecoderState::initial(inputs.decoder->cell.hidden_width());
  for (int s = 0; s < 2; ++s) {
    if (stream_active(inputs.mode, s)) root.ctc_states[s] = ctc_prefix_initial(inputs.ctc_log_posteriors[s]);
  }
  if (inputs.lm) root.lm_state = inputs.lm->initial_state();

  std::vector<Hypothesis> live{std::move(root)};
  std::vector<Hypothesis> finished;
  for (int step = 0; step <= cfg.max_len && !live.empty(); ++step) {
    std::vector<Hypothesis> candidates;
    for (const Hypothesis& hyp : live) {
      const int prev = hyp.prefix.empty() ? kSos : hyp.prefix.back();
      AttentionMemory::Step att = memory.step(hyp.att_state, prev, *inputs.decoder);
      const auto att_lp = att.decoder.log_probs.data();
      const int last_symbol = step == cfg.max_len ? kEos : k;
      for (int sym = kEos; sym <= last_symbol; ++sym) {
        Hypothesis cand;
        cand.prefix = hyp.prefix;
        const double ctc = ctc_increment(inputs, hyp, sym, cand.ctc_states);
        const double att_inc = att_lp[sym];
        double lm_inc = 0;
        if (inputs.lm) {
          auto [lm_state, score] = inputs.lm->score_extend(hyp.lm_state, sym);
          cand.lm_state = std::move(lm_state);
          lm_inc = score;
        }
        cand.ctc_part = hyp.ctc_part + ctc;
        cand.att_part = hyp.att_part + att_inc;
        cand.lm_part = hyp.lm_part + lm_inc;
        cand.score = combine(cfg, cand.ctc_part, cand.att_part, cand.lm_part);
        cand.att_state = att.decoder.state;
        if (sym == kEos) {
          cand.finished = true;
        } else {
          cand.prefix.push_back(sym);
        }
        candidates.push_back(std::move(cand));
      }
    }
    const std::size_t keep = std::min<std::size_t>(candidates.size(), static_cast<std::size_t>(cfg.beam_width));
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end(),
                      [](const Hypothesis& a, const Hypothesis& b) { return better(a.score, a.prefix, b.score, b.prefix); });
    candidates.resize(keep);
    live.clear();
    for (Hypothesis& c : candidates) (c.finished ? finished : live).push_back(std::move(c));
  }

  std::sort(finished.begin(), finished.end(),
            [](const Hypothesis& a, const Hypothesis& b) { return better(a.score, a.prefix, b.score, b.prefix); });
  DecodeResult result;
  if (!finished.empty()) {
    result.best = finished.front().prefix;
    result.score = finished.front().score;
    result.truncated = static_cast<int>(result.best.size()) == cfg.max_len;
  } else {
    result.score = kNegInf;
    result.truncated = true;
  }
  result.nbest = std::move(finished);
  return result;
}

SequenceScore score_sequence(const DecodeInputs& inputs, std::span<const int> labels, const DecodeConfig& cfg) {
  check_inputs(inputs);
  NoGradScope no_grad;
  SequenceScore out;
  double ctc = 0;
  int active = 0;
  for (int s = 0; s < 2; ++s) {
    if (!stream_active(inputs.mode, s)) continue;
    ctc += ctc_log_likelihood(inputs.ctc_log_posteriors[s], labels).value();
    ++active;
  }
  out.ctc = ctc / active;
  out.att = attention_sequence_log_likelihood(*inputs.enc, labels, *inputs.decoder, inputs.mode).item();
  out.lm = inputs.lm ? inputs.lm->sequence_log_prob(labels).item() : 0.0;
  out.total = combine(cfg, out.ctc, out.att, out.lm);
  return out;
}

LabelSequence exhaustive_search(const DecodeInputs& inputs, const DecodeConfig& cfg) {
  cfg.validate();
  check_inputs(inputs);
  const int k = num_letters(inputs);
  double count = 1;
  for (int i = 0; i < cfg.max_len; ++i) {
    count *= (k + 1);
    if (count > 1e6) throw SizeError("exhaustive_search: more than 1e6 candidate sequences");
  }

  LabelSequence best;
  double best_score = kNegInf;
  bool have_best = false;
  for (int len = 0; len <= cfg.max_len; ++len) {
    LabelSequence seq(len, 1);
    while (true) {
      const double score = score_sequence(inputs, seq, cfg).total;
      if (!have_best || better(score, seq, best_score, best)) {
        best = seq;
        best_score = score;
        have_best = true;
      }
      int i = len - 1;
      while (i >= 0 && ++seq[i] > k) seq[i--] = 1;
      if (i < 0) break;
    }
  }
  return best;
}

void write_nbest(std::ostream& os, const DecodeResult& result, const Vocabulary& vocab) {
  const auto flags = os.flags();
  const auto precision = os.precision();
  os << std::setprecision(17);
  for (const Hypothesis& hyp : result.nbest) os << hyp.score << '\t' << vocab.format(hyp.prefix) << '\n';
  os.flags(flags);
  os.precision(precision);
}

}  // namespace memr
