// include/memr/train.h
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
#include <functional>
#include <iosfwd>
#include <vector>

#include "memr/data.h"
#include "memr/model.h"

namespace memr {

struct TrainConfig {
  ModelConfig model;
  double lambda = 0.3;
  double learning_rate = 1e-3;
  int epochs = 30;
  std::uint64_t seed = 1;
  double clip_norm = 5.0;

  void validate() const;
};

// Per-epoch means over the utterances that were used. CTC and attention
// columns are negative log-likelihoods; NaN marks a branch that was not
// computed (inactive stream, or zero weight).
struct EpochMetrics {
  int epoch = 0;
  double mtl_loss = 0;
  double ctc1 = 0;
  double ctc2 = 0;
  double att = 0;
  int skipped = 0;  // CTC-infeasible utterances
};

struct TrainResult {
  Model model;
  std::vector<EpochMetrics> history;
};

using EpochCallback = std::function<void(const EpochMetrics&, const Model&)>;

// Per-utterance Adam updates on the multi-task loss, in a seeded shuffled
// order. A non-finite loss raises NumericError naming epoch and utterance.
TrainResult train(const TrainConfig& cfg, const std::vector<Utterance>& data, const EpochCallback& on_epoch = {});

// CSV with header "epoch,mtl_loss,ctc1,ctc2,att".
void write_metrics_csv(std::ostream& os, const std::vector<EpochMetrics>& history);

}  // namespace memr
