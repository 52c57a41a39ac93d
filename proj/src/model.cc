// src/model.cc
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

#include "memr/model.h"

#include "memr/errors.h"
#include "memr/ops.h"

namespace memr {

void ModelConfig::validate() const {
  if (num_letters < 1 || num_letters > 26) throw ConfigError("vocab must be between 1 and 26 letters");
  encoder.validate();
  if (attention_dim < 1 || decoder_hidden < 1 || embed < 1) throw ConfigError("decoder widths must be positive");
}

DecoderConfig ModelConfig::decoder_config() const {
  return DecoderConfig{num_letters, encoder.hidden, attention_dim, decoder_hidden, embed};
}

Tensor mtl_loss(const Tensor& ctc_joint_ll, const Tensor& att_ll, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("mtl_loss: lambda must lie in [0, 1]");
  if (lambda == 1.0) return scale(ctc_joint_ll, -1.0);
  if (lambda == 0.0) return scale(att_ll, -1.0);
  return scale(add(scale(ctc_joint_ll, lambda), scale(att_ll, 1.0 - lambda)), -1.0);
}

Model Model::init(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  Model m;
  m.config_ = cfg;
  m.blstm_ = BlstmParams::init(cfg.encoder.input_dim, cfg.encoder.hidden, cfg.encoder.blstm_layers, rng);
  m.vgg_ = VggBlstmParams::init(cfg.encoder, rng);
  m.ctc1_ = Linear::init(cfg.encoder.hidden, cfg.num_letters + 1, rng);
  m.ctc2_ = Linear::init(cfg.encoder.hidden, cfg.num_letters + 1, rng);
  m.decoder_ = DecoderParams::init(cfg.decoder_config(), rng);
  return m;
}

NamedParams Model::named_parameters() const {
  NamedParams out;
  blstm_.collect("enc1", out);
  vgg_.collect("enc2", out);
  ctc1_.collect("ctc1", out);
  ctc2_.collect("ctc2", out);
  decoder_.collect("dec", out);
  return out;
}

std::vector<Tensor> Model::parameters() const {
  std::vector<Tensor> out;
  for (auto& [name, t] : named_parameters()) out.push_back(t);
  return out;
}

EncoderOutputs Model::encode(const Tensor& features) const {
  EncoderOutputs enc;
  if (config_.streams != StreamMode::kSecondOnly) enc.h1 = blstm_forward(features, blstm_);
  if (config_.streams != StreamMode::kFirstOnly) enc.h2 = vggblstm_forward(features, vgg_);
  return enc;
}

std::array<Tensor, 2> Model::ctc_log_posteriors(const EncoderOutputs& enc) const {
  std::array<Tensor, 2> out;
  if (enc.h1.defined()) out[0] = log_softmax_rows(ctc1_.forward(enc.h1));
  if (enc.h2.defined()) out[1] = log_softmax_rows(ctc2_.forward(enc.h2));
  return out;
}

LossBreakdown Model::loss(const Tensor& features, std::span<const int> labels, double lambda) const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("loss: lambda must lie in [0, 1]");
  LossBreakdown out;
  const EncoderOutputs enc = encode(features);
  if (lambda > 0.0) {
    const auto posteriors = ctc_log_posteriors(enc);
    if (posteriors[0].defined()) out.ctc1 = ctc_log_likelihood(posteriors[0], labels);
    if (posteriors[1].defined()) out.ctc2 = ctc_log_likelihood(posteriors[1], labels);
    switch (config_.streams) {
      case StreamMode::kBoth:
        out.ctc_joint = joint_ctc_log_likelihood(out.ctc1, out.ctc2);
        break;
      case StreamMode::kFirstOnly:
        out.ctc_joint = out.ctc1;
        break;
      case StreamMode::kSecondOnly:
        out.ctc_joint = out.ctc2;
        break;
    }
    if (!out.ctc_joint.feasible) {
      out.feasible = false;
      return out;
    }
  }
  if (lambda < 1.0) out.att = attention_sequence_log_likelihood(enc, labels, decoder_, config_.streams);
  out.total = mtl_loss(out.ctc_joint.log_likelihood, out.att, lambda);
  return out;
}

DecodeResult Model::decode(const Tensor& features, const LanguageModel* lm, const DecodeConfig& cfg) const {
  NoGradScope no_grad;
  const EncoderOutputs enc = encode(features);
  DecodeInputs inputs;
  inputs.enc = &enc;
  inputs.ctc_log_posteriors = ctc_log_posteriors(enc);
  inputs.decoder = &decoder_;
  inputs.mode = config_.streams;
  inputs.lm = lm;
  return joint_beam_search(inputs, cfg);
}

}  // namespace memr
