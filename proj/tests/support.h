// tests/support.h
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

#include <memory>
#include <optional>

#include "memr/attention.h"
#include "memr/decoding.h"
#include "memr/encoders.h"
#include "memr/lm.h"
#include "memr/model.h"
#include "memr/ops.h"

namespace memr::testing {

// Random encoder outputs and CTC posteriors with a decoder (and optionally
// an LM), small enough for exhaustive search.
struct TinyInstance {
  EncoderOutputs enc;
  std::array<Tensor, 2> ctc;
  std::unique_ptr<DecoderParams> decoder;
  std::optional<LanguageModel> lm;

  DecodeInputs inputs(StreamMode mode = StreamMode::kBoth, bool with_lm = true) const {
    DecodeInputs in;
    in.enc = &enc;
    in.ctc_log_posteriors = ctc;
    in.decoder = decoder.get();
    in.mode = mode;
    in.lm = with_lm && lm ? &*lm : nullptr;
    return in;
  }
};

inline TinyInstance make_tiny_instance(Rng& rng, int frames, int letters, bool with_lm) {
  const int width = 3;
  TinyInstance inst;
  const int quarter = (frames + 3) / 4;
  inst.enc = EncoderOutputs{randn({frames, width}, rng), randn({quarter, width}, rng)};
  // Sharp-ish posteriors so the objective has a clear landscape.
  inst.ctc[0] = log_softmax_rows(randn({frames, letters + 1}, rng, 2.0));
  inst.ctc[1] = log_softmax_rows(randn({quarter, letters + 1}, rng, 2.0));
  inst.decoder = std::make_unique<DecoderParams>(DecoderParams::init(DecoderConfig{letters, width, 4, 4, 3}, rng));
  if (with_lm) inst.lm.emplace(LanguageModel::init(LmConfig{letters, 3, 4}, rng));
  return inst;
}

// Plain joint CTC/attention loss over the first stream only, composed from
// primitives: no fusion layer, no second CTC head.
inline double composed_single_stream_loss(const Model& model, const Tensor& features, std::span<const int> labels,
                                          double lambda) {
  NoGradScope no_grad;
  const Tensor h = blstm_forward(features, model.blstm());
  const Tensor posteriors = log_softmax_rows(model.ctc_head(0).forward(h));
  const double ctc = ctc_log_likelihood(posteriors, labels).log_likelihood.item();

  const DecoderParams& p = model.decoder();
  DecoderState state = DecoderState::initial(model.config().decoder_hidden);
  int prev = kSos;
  double att = 0;
  for (std::size_t l = 0; l <= labels.size(); ++l) {
    const AttentionResult a = content_attention(state.lstm.h, h, p.attention1);
    const DecoderStepResult out = decoder_step(state, prev, a.context, p);
    const int target = l < labels.size() ? labels[l] : kEos;
    att += out.log_probs[target];
    state = out.state;
    prev = target;
  }
  return -(lambda * ctc + (1.0 - lambda) * att);
}

}  // namespace memr::testing
