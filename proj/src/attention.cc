// src/attention.cc
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

#include "memr/attention.h"

#include <cmath>

#include "memr/errors.h"
#include "memr/ops.h"

namespace memr {

std::string to_string(StreamMode mode) {
  switch (mode) {
    case StreamMode::kBoth:
      return "both";
    case StreamMode::kFirstOnly:
      return "blstm";
    case StreamMode::kSecondOnly:
      return "vgg";
  }
  return "both";
}

StreamMode parse_stream_mode(const std::string& text) {
  if (text == "both") return StreamMode::kBoth;
  if (text == "blstm" || text == "first") return StreamMode::kFirstOnly;
  if (text == "vgg" || text == "second") return StreamMode::kSecondOnly;
  throw ConfigError("unknown stream mode '" + text + "' (expected both, blstm or vgg)");
}

AttentionParams AttentionParams::init(int query_width, int key_width, int attention_dim, Rng& rng) {
  AttentionParams p;
  const double kq = 1.0 / std::sqrt(static_cast<double>(query_width));
  const double kk = 1.0 / std::sqrt(static_cast<double>(key_width));
  const double ks = 1.0 / std::sqrt(static_cast<double>(attention_dim));
  p.query_proj = uniform({query_width, attention_dim}, -kq, kq, rng).set_requires_grad(true);
  p.key_proj = uniform({key_width, attention_dim}, -kk, kk, rng).set_requires_grad(true);
  p.bias = Tensor({1, attention_dim}).set_requires_grad(true);
  p.score = uniform({attention_dim, 1}, -ks, ks, rng).set_requires_grad(true);
  return p;
}

void AttentionParams::collect(const std::string& prefix, NamedParams& out) const {
  out.emplace_back(prefix + ".query_proj", query_proj);
  out.emplace_back(prefix + ".key_proj", key_proj);
  out.emplace_back(prefix + ".bias", bias);
  out.emplace_back(prefix + ".score", score);
}

AttentionResult content_attention(const Tensor& query, const Tensor& h, const AttentionParams& params,
                                  const Tensor& keys) {
  if (h.rank() != 2 || h.rows() == 0) throw ContractError("content_attention: empty encoder memory");
  if (h.cols() != params.key_proj.rows() || query.cols() != params.query_proj.rows()) {
    throw DimensionError("content_attention: memory " + shape_to_string(h.shape()) + ", query " +
                         shape_to_string(query.shape()) + " vs key projection " +
                         shape_to_string(params.key_proj.shape()));
  }
  const Tensor projected_keys = keys.defined() ? keys : matmul(h, params.key_proj);
  const Tensor projected_query = add(matmul(query, params.query_proj), params.bias);
  const Tensor energies = matmul(tanh(add_row_broadcast(projected_keys, projected_query)), params.score);
  Tensor weights = softmax_rows(reshape(energies, {1, h.rows()}));
  Tensor context = matmul(weights, h);
  return AttentionResult{std::move(weights), std::move(context)};
}

FusionResult han_fuse(const Tensor& query, const Tensor& r1, const Tensor& r2, const AttentionParams& params) {
  if (r1.shape() != r2.shape()) {
    throw DimensionError("han_fuse: context widths differ, " + shape_to_string(r1.shape()) + " vs " +
                         shape_to_string(r2.shape()));
  }
  const Tensor streams[] = {r1, r2};
  AttentionResult att = content_attention(query, concat_rows(streams), params);
  return FusionResult{std::move(att.weights), std::move(att.context)};
}

DecoderParams DecoderParams::init(const DecoderConfig& cfg, Rng& rng) {
  if (cfg.num_letters < 1 || cfg.encoder_width < 1 || cfg.attention_dim < 1 || cfg.hidden < 1 || cfg.embed < 1) {
    throw ConfigError("decoder widths must be positive");
  }
  DecoderParams p;
  p.embedding = uniform({cfg.num_letters + 1, cfg.embed}, -1.0, 1.0, rng).set_requires_grad(true);
  p.cell = RecurrentCell::init(cfg.embed + cfg.encoder_width, cfg.hidden, rng);
  p.output = Linear::init(cfg.hidden, cfg.num_letters + 1, rng);
  p.attention1 = AttentionParams::init(cfg.hidden, cfg.encoder_width, cfg.attention_dim, rng);
  p.attention2 = AttentionParams::init(cfg.hidden, cfg.encoder_width, cfg.attention_dim, rng);
  p.fusion = AttentionParams::init(cfg.hidden, cfg.encoder_width, cfg.attention_dim, rng);
  return p;
}

void DecoderParams::collect(const std::string& prefix, NamedParams& out) const {
  out.emplace_back(prefix + ".embedding", embedding);
  cell.collect(prefix + ".lstm", out);
  output.collect(prefix + ".output", out);
  attention1.collect(prefix + ".att1", out);
  attention2.collect(prefix + ".att2", out);
  fusion.collect(prefix + ".han", out);
}

DecoderState DecoderState::initial(int hidden) { return DecoderState{LstmState::zeros(hidden), 0}; }

DecoderStepResult decoder_step(const DecoderState& state, int prev_letter, const Tensor& fused_context,
                               const DecoderParams& params) {
  const int k = params.num_letters();
  if (prev_letter < 0 || prev_letter > k) {
    throw VocabularyError("decoder_step: symbol " + std::to_string(prev_letter) + " outside sos + " +
                          std::to_string(k) + " letters");
  }
  const Tensor input[] = {slice_rows(params.embedding, prev_letter, prev_letter + 1), fused_context};
  LstmState lstm = lstm_cell_step(params.cell, concat_cols(input), state.lstm);
  Tensor log_probs = log_softmax_rows(params.output.forward(lstm.h));
  return DecoderStepResult{DecoderState{std::move(lstm), state.step + 1}, std::move(log_probs)};
}

AttentionMemory::AttentionMemory(const EncoderOutputs& enc, const DecoderParams& params, StreamMode mode)
    : enc_(enc), mode_(mode) {
  if (mode != StreamMode::kSecondOnly) {
    if (!enc.h1.defined()) throw ContractError("AttentionMemory: first stream missing");
    keys1_ = matmul(enc.h1, params.attention1.key_proj);
  }
  if (mode != StreamMode::kFirstOnly) {
    if (!enc.h2.defined()) throw ContractError("AttentionMemory: second stream missing");
    keys2_ = matmul(enc.h2, params.attention2.key_proj);
  }
}

AttentionMemory::Step AttentionMemory::step(const DecoderState& state, int prev_letter,
                                            const DecoderParams& params) const {
  Step out;
  const Tensor& query = state.lstm.h;
  switch (mode_) {
    case StreamMode::kBoth:
      out.stream1 = content_attention(query, enc_.h1, params.attention1, keys1_);
      out.stream2 = content_attention(query, enc_.h2, params.attention2, keys2_);
      out.fusion = han_fuse(query, out.stream1.context, out.stream2.context, params.fusion);
      break;
    case StreamMode::kFirstOnly:
      out.stream1 = content_attention(query, enc_.h1, params.attention1, keys1_);
      out.fusion = FusionResult{Tensor::row({1.0, 0.0}), out.stream1.context};
      break;
    case StreamMode::kSecondOnly:
      out.stream2 = content_attention(query, enc_.h2, params.attention2, keys2_);
      out.fusion = FusionResult{Tensor::row({0.0, 1.0}), out.stream2.context};
      break;
  }
  out.decoder = decoder_step(state, prev_letter, out.fusion.fused, params);
  return out;
}

Tensor attention_sequence_log_likelihood(const EncoderOutputs& enc, std::span<const int> labels,
                                         const DecoderParams& params, StreamMode mode) {
  const int k = params.num_letters();
  for (int c : labels) {
    if (c < 1 || c > k) throw VocabularyError("attention: label " + std::to_string(c) + " is not a letter");
  }
  const AttentionMemory memory(enc, params, mode);
  DecoderState state = DecoderState::initial(params.cell.hidden_width());
  int prev = kSos;
  std::vector<Tensor> picks;
  picks.reserve(labels.size() + 1);
  for (std::size_t l = 0; l <= labels.size(); ++l) {
    const int target = l < labels.size() ? labels[l] : kEos;
    AttentionMemory::Step step = memory.step(state, prev, params);
    const int index[] = {target};
    picks.push_back(gather(step.decoder.log_probs, index, {1, 1}));
    state = std::move(step.decoder.state);
    prev = target;
  }
  return sum(concat_cols(picks));
}

}  // namespace memr
