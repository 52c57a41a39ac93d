// include/memr/attention.h
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

#include <string>

#include "memr/ctc.h"
#include "memr/encoders.h"
#include "memr/layers.h"
#include "memr/tensor.h"

namespace memr {

// Which encoder streams feed the decoder (and the CTC objective).
// kFirstOnly is the single-stream reduction: stream weights are pinned to
// (1, 0) and only the first CTC head is used.
enum class StreamMode { kBoth, kFirstOnly, kSecondOnly };

std::string to_string(StreamMode mode);
StreamMode parse_stream_mode(const std::string& text);

// Additive content attention: e_t = w . tanh(W q + V h_t + b).
struct AttentionParams {
  Tensor query_proj;  // W [query x A]
  Tensor key_proj;    // V [H x A]
  Tensor bias;        // b [1 x A]
  Tensor score;       // w [A x 1]

  static AttentionParams init(int query_width, int key_width, int attention_dim, Rng& rng);
  void collect(const std::string& prefix, NamedParams& out) const;
};

struct AttentionResult {
  Tensor weights;  // [1 x T']
  Tensor context;  // [1 x H]
};

// `keys` may carry a precomputed h V (it does not depend on the query).
AttentionResult content_attention(const Tensor& query, const Tensor& h, const AttentionParams& params,
                                  const Tensor& keys = Tensor());

struct FusionResult {
  Tensor stream_weights;  // [1 x 2], (beta_1, beta_2)
  Tensor fused;           // [1 x H]
};

// Stream-level attention over the two context vectors with the previous
// decoder state as query; fused = beta_1 r1 + beta_2 r2.
FusionResult han_fuse(const Tensor& query, const Tensor& r1, const Tensor& r2, const AttentionParams& params);

struct DecoderConfig {
  int num_letters = 6;
  int encoder_width = 64;  // H
  int attention_dim = 64;
  int hidden = 64;         // decoder state q width
  int embed = 32;
};

struct DecoderParams {
  Tensor embedding;  // [(K + 1) x embed], row 0 is sos
  RecurrentCell cell;  // input: embed + H
  Linear output;       // q -> K + 1 logits, column 0 is eos
  AttentionParams attention1;
  AttentionParams attention2;
  AttentionParams fusion;

  static DecoderParams init(const DecoderConfig& cfg, Rng& rng);
  void collect(const std::string& prefix, NamedParams& out) const;
  int num_letters() const { return embedding.rows() - 1; }
};

struct DecoderState {
  LstmState lstm;  // q_l
  int step = 0;

  static DecoderState initial(int hidden);
};

struct DecoderStepResult {
  DecoderState state;
  Tensor log_probs;  // [1 x (K + 1)]
};

// Feeds [embed(prev_letter) ; fused_context] to the decoder LSTM and returns
// the log-softmax over eos + letters.
DecoderStepResult decoder_step(const DecoderState& state, int prev_letter, const Tensor& fused_context,
                               const DecoderParams& params);

// Encoder outputs with their attention keys projected once per utterance.
class AttentionMemory {
 public:
  AttentionMemory(const EncoderOutputs& enc, const DecoderParams& params, StreamMode mode);

  StreamMode mode() const { return mode_; }
  const EncoderOutputs& outputs() const { return enc_; }

  struct Step {
    DecoderStepResult decoder;
    AttentionResult stream1;  // undefined tensors for an inactive stream
    AttentionResult stream2;
    FusionResult fusion;
  };

  // Attends over both streams, fuses the contexts and advances the decoder.
  Step step(const DecoderState& state, int prev_letter, const DecoderParams& params) const;

 private:
  EncoderOutputs enc_;
  Tensor keys1_;
  Tensor keys2_;
  StreamMode mode_;
};

// Teacher-forced sum of log p(c_l | c_<l, X) over the labels plus the final
// log p(eos | c, X).
Tensor attention_sequence_log_likelihood(const EncoderOutputs& enc, std::span<const int> labels,
                                         const DecoderParams& params, StreamMode mode = StreamMode::kBoth);

}  // namespace memr
