// include/memr/encoders.h
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
#include <vector>

#include "memr/layers.h"
#include "memr/tensor.h"

namespace memr {

struct EncoderConfig {
  int input_dim = 20;        // D
  int hidden = 64;           // H, shared output width of both streams
  int blstm_layers = 2;      // recurrent layers in the full-resolution stream
  int vgg_channels1 = 64;    // first conv block
  int vgg_channels2 = 128;   // second conv block
  int vgg_recurrent_layers = 1;

  void validate() const;
};

// One bidirectional layer: two independent unidirectional passes whose states
// are concatenated per frame and projected to the layer output width.
struct BlstmLayer {
  RecurrentCell forward;
  RecurrentCell backward;
  Linear projection;  // [2 hidden x out]

  static BlstmLayer init(int input_width, int hidden, int out, Rng& rng);
  void collect(const std::string& prefix, NamedParams& out) const;
};

struct BlstmParams {
  std::vector<BlstmLayer> layers;

  static BlstmParams init(int input_width, int hidden, int num_layers, Rng& rng);
  void collect(const std::string& prefix, NamedParams& out) const;
};

// Two VGG-style blocks (conv3x3, conv3x3, maxpool2x2 each) followed by
// bidirectional recurrent layers over the pooled, flattened frames.
struct VggBlstmParams {
  Tensor conv1a_w, conv1a_b;
  Tensor conv1b_w, conv1b_b;
  Tensor conv2a_w, conv2a_b;
  Tensor conv2b_w, conv2b_b;
  BlstmParams recurrent;

  static VggBlstmParams init(const EncoderConfig& cfg, Rng& rng);
  void collect(const std::string& prefix, NamedParams& out) const;
};

// Width of each flattened frame after the conv stack: channels2 * ceil(D / 4).
int vgg_flat_width(const EncoderConfig& cfg);
// Output frame count of the VGG stream: ceil(T / 4), at least 1.
int vgg_output_frames(int num_frames);

// Full-resolution stream: [T x D] -> [T x H].
Tensor blstm_forward(const Tensor& features, const BlstmParams& params);

// Quarter-resolution stream: [T x D] -> [ceil(T/4) x H]. Time is zero padded
// to a multiple of 4 (and to at least 4 frames) before pooling.
Tensor vggblstm_forward(const Tensor& features, const VggBlstmParams& params);

// Output of both streams on one utterance. h2 is undefined when the second
// stream is disabled, h1 when the first is.
struct EncoderOutputs {
  Tensor h1;  // [T x H]
  Tensor h2;  // [ceil(T/4) x H]
};

}  // namespace memr
