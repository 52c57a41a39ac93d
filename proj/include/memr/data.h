// include/memr/data.h
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
#include <string>
#include <vector>

#include "memr/ctc.h"
#include "memr/tensor.h"

namespace memr {

struct Utterance {
  std::string id;
  Tensor features;  // [T x D]
  LabelSequence labels;
};

// Synthetic letter-sequence corpus. Each letter owns a fixed random
// prototype in R^D (drawn from `seed`); an utterance renders each of its
// letters as a run of that prototype, then adds i.i.d. Gaussian noise.
// `split` selects an independent stream of utterances over the same
// prototypes, so train and held-out sets share letters.
struct SynthConfig {
  std::uint64_t seed = 1;
  int split = 0;
  int vocab_size = 6;
  int input_dim = 20;
  int n_utts = 50;
  int len_min = 2;
  int len_max = 6;
  int dur_min = 3;
  int dur_max = 8;
  double noise_sigma = 0.1;

  // Also rejects length/duration ranges that cannot always give a CTC
  // feasible alignment at quarter resolution.
  void validate() const;
};

Tensor letter_prototypes(std::uint64_t seed, int vocab_size, int input_dim);

std::vector<Utterance> synth_dataset(const SynthConfig& cfg);

struct Dataset {
  int vocab_size = 0;
  std::vector<Utterance> utterances;

  std::vector<LabelSequence> label_corpus() const;
};

// Directory layout: meta.txt (key = value), labels.txt ("id<TAB>a b c" per
// line) and features.ckpt (one [T x D] tensor per utterance, named by id).
void save_dataset(const std::string& dir, const Dataset& data);
Dataset load_dataset(const std::string& dir);

}  // namespace memr
