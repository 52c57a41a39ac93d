// include/memr/model.h
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

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "memr/attention.h"
#include "memr/ctc.h"
#include "memr/decoding.h"
#include "memr/encoders.h"
#include "memr/layers.h"

namespace memr {

struct ModelConfig {
  int num_letters = 6;
  EncoderConfig encoder;
  int attention_dim = 64;
  int decoder_hidden = 64;
  int embed = 32;
  StreamMode streams = StreamMode::kBoth;

  void validate() const;
  DecoderConfig decoder_config() const;
};

// -(lambda * ctc + (1 - lambda) * att). At either endpoint the unused branch
// may be an undefined tensor and is not touched.
Tensor mtl_loss(const Tensor& ctc_joint_ll, const Tensor& att_ll, double lambda);

struct LossBreakdown {
  Tensor total;          // undefined when the utterance was skipped
  CtcResult ctc1;        // per-stream CTC log-likelihoods (undefined if inactive)
  CtcResult ctc2;
  CtcResult ctc_joint;   // stream average
  Tensor att;            // teacher-forced attention log-likelihood (undefined if lambda == 1)
  bool feasible = true;
};

// Two encoders with a CTC head each, plus the fused attention decoder.
// All parameters always exist; `streams` selects which ones a forward pass
// reads.
class Model {
 public:
  static Model init(const ModelConfig& cfg, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  Vocabulary vocabulary() const { return Vocabulary(config_.num_letters); }

  NamedParams named_parameters() const;
  std::vector<Tensor> parameters() const;

  EncoderOutputs encode(const Tensor& features) const;
  // Log-softmax CTC posteriors per active stream.
  std::array<Tensor, 2> ctc_log_posteriors(const EncoderOutputs& enc) const;
  LossBreakdown loss(const Tensor& features, std::span<const int> labels, double lambda) const;
  DecodeResult decode(const Tensor& features, const LanguageModel* lm, const DecodeConfig& cfg) const;

  const BlstmParams& blstm() const { return blstm_; }
  const VggBlstmParams& vgg() const { return vgg_; }
  const Linear& ctc_head(int stream) const { return stream == 0 ? ctc1_ : ctc2_; }
  const DecoderParams& decoder() const { return decoder_; }

 private:
  ModelConfig config_;
  BlstmParams blstm_;
  VggBlstmParams vgg_;
  Linear ctc1_;
  Linear ctc2_;
  DecoderParams decoder_;
};

}  // namespace memr
