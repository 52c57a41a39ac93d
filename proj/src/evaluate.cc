// src/evaluate.cc
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

#include "memr/evaluate.h"

#include <algorithm>
#include <ostream>

#include "memr/errors.h"

namespace memr {

int edit_distance(std::span<const int> ref, std::span<const int> hyp) {
  std::vector<int> row(hyp.size() + 1);
  for (std::size_t j = 0; j <= hyp.size(); ++j) row[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= ref.size(); ++i) {
    int diag = row[0];
    row[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= hyp.size(); ++j) {
      const int up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (ref[i - 1] == hyp[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[hyp.size()];
}

double corpus_cer(const std::vector<LabelSequence>& refs, const std::vector<LabelSequence>& hyps) {
  if (refs.size() != hyps.size()) throw DataError("corpus_cer: reference and hypothesis counts differ");
  long errors = 0, length = 0;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    errors += edit_distance(refs[i], hyps[i]);
    length += static_cast<long>(refs[i].size());
  }
  if (length == 0) return errors == 0 ? 0.0 : 1.0;
  return static_cast<double>(errors) / static_cast<double>(length);
}

EvalResult evaluate(const Model& model, const std::vector<Utterance>& data, const LanguageModel* lm,
                    const DecodeConfig& cfg) {
  EvalResult out;
  std::vector<LabelSequence> refs, hyps;
  for (const Utterance& u : data) {
    UtteranceResult r;
    r.id = u.id;
    r.ref = u.labels;
    r.decode = model.decode(u.features, lm, cfg);
    r.hyp = r.decode.best;
    out.errors += edit_distance(r.ref, r.hyp);
    out.ref_length += static_cast<long>(r.ref.size());
    refs.push_back(r.ref);
    hyps.push_back(r.hyp);
    out.utterances.push_back(std::move(r));
  }
  out.cer = corpus_cer(refs, hyps);
  return out;
}

void write_hypotheses(std::ostream& os, const EvalResult& result, const Vocabulary& vocab) {
  for (const auto& u : result.utterances) os << u.id << '\t' << vocab.format(u.hyp) << '\n';
}

}  // namespace memr
