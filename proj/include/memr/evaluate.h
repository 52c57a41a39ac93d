// include/memr/evaluate.h
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

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "memr/data.h"
#include "memr/decoding.h"
#include "memr/lm.h"
#include "memr/model.h"

namespace memr {

// Levenshtein distance with unit substitution, insertion and deletion costs.
int edit_distance(std::span<const int> ref, std::span<const int> hyp);

struct UtteranceResult {
  std::string id;
  LabelSequence ref;
  LabelSequence hyp;
  DecodeResult decode;
};

struct EvalResult {
  double cer = 0;
  long errors = 0;
  long ref_length = 0;
  std::vector<UtteranceResult> utterances;  // in dataset order
};

// Total edit distance over total reference length. An empty reference
// corpus scores 0 if every hypothesis is empty too, else 1.
double corpus_cer(const std::vector<LabelSequence>& refs, const std::vector<LabelSequence>& hyps);

EvalResult evaluate(const Model& model, const std::vector<Utterance>& data, const LanguageModel* lm,
                    const DecodeConfig& cfg);

// "id<TAB>a b c" per utterance.
void write_hypotheses(std::ostream& os, const EvalResult& result, const Vocabulary& vocab);

}  // namespace memr
