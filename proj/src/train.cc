// src/train.cc
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

#include "memr/train.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>

#include "memr/errors.h"
#include "memr/optimizer.h"

namespace memr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Mean {
  double total = 0;
  int count = 0;
  void add(double v) {
    total += v;
    ++count;
  }
  double value() const { return count ? total / count : kNaN; }
};

}  // namespace

void TrainConfig::validate() const {
  model.validate();
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("train: lambda must lie in [0, 1]");
  if (!(learning_rate > 0)) throw ConfigError("train: learning rate must be positive");
  if (epochs < 1) throw ConfigError("train: epochs must be at least 1");
}

TrainResult train(const TrainConfig& cfg, const std::vector<Utterance>& data, const EpochCallback& on_epoch) {
  cfg.validate();
  if (data.empty()) throw DataError("train: empty dataset");
  for (const auto& u : data) {
    if (u.features.cols() != cfg.model.encoder.input_dim) {
      throw DataError("utterance " + u.id + " has feature width " + std::to_string(u.features.cols()) +
                      ", model expects " + std::to_string(cfg.model.encoder.input_dim));
    }
  }

  TrainResult result{Model::init(cfg.model, cfg.seed), {}};
  Adam adam(result.model.parameters(), AdamConfig{.learning_rate = cfg.learning_rate, .clip_norm = cfg.clip_norm});
  Rng order_rng(cfg.seed + 1);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), order_rng.engine());
    Mean total, ctc1, ctc2, att;
    EpochMetrics m;
    m.epoch = epoch;
    for (std::size_t i : order) {
      const Utterance& u = data[i];
      Tape tape;
      LossBreakdown loss;
      try {
        TapeScope scope(tape);
        loss = result.model.loss(u.features, u.labels, cfg.lambda);
      } catch (const NumericError& e) {
        throw NumericError("epoch " + std::to_string(epoch) + ", utterance " + u.id + ": " + e.what());
      }
      if (!loss.feasible) {
        ++m.skipped;
        continue;
      }
      const double value = loss.total.item();
      if (!std::isfinite(value)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", utterance " + u.id);
      }
      tape.backward(loss.total);
      adam.step();
      total.add(value);
      if (loss.ctc1.log_likelihood.defined()) ctc1.add(-loss.ctc1.value());
      if (loss.ctc2.log_likelihood.defined()) ctc2.add(-loss.ctc2.value());
      if (loss.att.defined()) att.add(-loss.att.item());
    }
    m.mtl_loss = total.value();
    m.ctc1 = ctc1.value();
    m.ctc2 = ctc2.value();
    m.att = att.value();
    result.history.push_back(m);
    if (on_epoch) on_epoch(m, result.model);
  }
  return result;
}

void write_metrics_csv(std::ostream& os, const std::vector<EpochMetrics>& history) {
  os << "epoch,mtl_loss,ctc1,ctc2,att\n";
  os << std::setprecision(10);
  for (const auto& m : history) {
    os << m.epoch << ',' << m.mtl_loss << ',' << m.ctc1 << ',' << m.ctc2 << ',' << m.att << '\n';
  }
}

}  // namespace memr
