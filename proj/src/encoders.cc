// src/encoders.cc
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

#include "memr/encoders.h"

#include <cmath>

#include "memr/errors.h"
#include "memr/ops.h"

namespace memr {

namespace {

Tensor conv_weight(int cout, int cin, Rng& rng) {
  const double k = std::sqrt(6.0 / (cin * 9.0));
  return uniform({cout, cin, 3, 3}, -k, k, rng).set_requires_grad(true);
}

Tensor conv_bias(int cout) { return Tensor({1, cout}).set_requires_grad(true); }

// One direction over the whole sequence; returns [T x hidden] in time order.
Tensor unidirectional(const Tensor& x, const RecurrentCell& cell, bool reverse) {
  const int t_len = x.rows();
  const Tensor gates_in = add_row_broadcast(matmul(x, cell.w_input), cell.bias);
  std::vector<Tensor> states(t_len);
  LstmState state = LstmState::zeros(cell.hidden_width());
  for (int i = 0; i < t_len; ++i) {
    const int t = reverse ? t_len - 1 - i : i;
    state = lstm_cell_step_projected(cell, slice_rows(gates_in, t, t + 1), state);
    states[t] = state.h;
  }
  return concat_rows(states);
}

void check_features(const Tensor& features, int expected_dim, const char* op) {
  if (features.rank() != 2) {
    throw DimensionError(std::string(op) + ": features must be [T x D], got " + shape_to_string(features.shape()));
  }
  if (features.cols() != expected_dim) {
    throw DimensionError(std::string(op) + ": feature width " + std::to_string(features.cols()) +
                         " but encoder expects " + std::to_string(expected_dim));
  }
}

}  // namespace

void EncoderConfig::validate() const {
  if (input_dim < 1 || hidden < 1 || blstm_layers < 1 || vgg_channels1 < 1 || vgg_channels2 < 1 ||
      vgg_recurrent_layers < 1) {
    throw ConfigError("encoder widths and layer counts must be positive");
  }
}

BlstmLayer BlstmLayer::init(int input_width, int hidden, int out, Rng& rng) {
  BlstmLayer layer;
  layer.forward = RecurrentCell::init(input_width, hidden, rng);
  layer.backward = RecurrentCell::init(input_width, hidden, rng);
  layer.projection = Linear::init(2 * hidden, out, rng);
  return layer;
}

void BlstmLayer::collect(const std::string& prefix, NamedParams& out) const {
  forward.collect(prefix + ".fwd", out);
  backward.collect(prefix + ".bwd", out);
  projection.collect(prefix + ".proj", out);
}

BlstmParams BlstmParams::init(int input_width, int hidden, int num_layers, Rng& rng) {
  BlstmParams p;
  for (int i = 0; i < num_layers; ++i) {
    p.layers.push_back(BlstmLayer::init(i == 0 ? input_width : hidden, hidden, hidden, rng));
  }
  return p;
}

void BlstmParams::collect(const std::string& prefix, NamedParams& out) const {
  for (std::size_t i = 0; i < layers.size(); ++i) layers[i].collect(prefix + ".layer" + std::to_string(i), out);
}

int vgg_flat_width(const EncoderConfig& cfg) {
  const int pooled_once = (cfg.input_dim + 1) / 2;
  return cfg.vgg_channels2 * ((pooled_once + 1) / 2);
}

int vgg_output_frames(int num_frames) { return num_frames <= 4 ? 1 : (num_frames + 3) / 4; }

VggBlstmParams VggBlstmParams::init(const EncoderConfig& cfg, Rng& rng) {
  VggBlstmParams p;
  p.conv1a_w = conv_weight(cfg.vgg_channels1, 1, rng);
  p.conv1a_b = conv_bias(cfg.vgg_channels1);
  p.conv1b_w = conv_weight(cfg.vgg_channels1, cfg.vgg_channels1, rng);
  p.conv1b_b = conv_bias(cfg.vgg_channels1);
  p.conv2a_w = conv_weight(cfg.vgg_channels2, cfg.vgg_channels1, rng);
  p.conv2a_b = conv_bias(cfg.vgg_channels2);
  p.conv2b_w = conv_weight(cfg.vgg_channels2, cfg.vgg_channels2, rng);
  p.conv2b_b = conv_bias(cfg.vgg_channels2);
  p.recurrent = BlstmParams::init(vgg_flat_width(cfg), cfg.hidden, cfg.vgg_recurrent_layers, rng);
  return p;
}

void VggBlstmParams::collect(const std::string& prefix, NamedParams& out) const {
  out.emplace_back(prefix + ".conv1a.weight", conv1a_w);
  out.emplace_back(prefix + ".conv1a.bias", conv1a_b);
  out.emplace_back(prefix + ".conv1b.weight", conv1b_w);
  out.emplace_back(prefix + ".conv1b.bias", conv1b_b);
  out.emplace_back(prefix + ".conv2a.weight", conv2a_w);
  out.emplace_back(prefix + ".conv2a.bias", conv2a_b);
  out.emplace_back(prefix + ".conv2b.weight", conv2b_w);
  out.emplace_back(prefix + ".conv2b.bias", conv2b_b);
  recurrent.collect(prefix + ".blstm", out);
}

Tensor blstm_forward(const Tensor& features, const BlstmParams& params) {
  if (params.layers.empty()) throw ContractError("blstm_forward: no layers");
  check_features(features, params.layers.front().forward.input_width(), "blstm_forward");
  if (features.rows() == 0) throw ContractError("blstm_forward: empty input");
  Tensor x = features;
  for (const BlstmLayer& layer : params.layers) {
    const Tensor both[] = {unidirectional(x, layer.forward, false), unidirectional(x, layer.backward, true)};
    x = layer.projection.forward(concat_cols(both));
  }
  return x;
}

Tensor vggblstm_forward(const Tensor& features, const VggBlstmParams& params) {
  check_features(features, features.cols(), "vggblstm_forward");
  if (features.rows() == 0) throw ContractError("vggblstm_forward: empty input");
  const int t_len = features.rows();
  const int d = features.cols();
  const int padded = 4 * vgg_output_frames(t_len);

  Tensor x = features;
  if (padded > t_len) {
    const Tensor parts[] = {features, Tensor({padded - t_len, d})};
    x = concat_rows(parts);
  }
  x = reshape(x, {1, padded, d});
  x = relu(conv2d_3x3(x, params.conv1a_w, params.conv1a_b));
  x = relu(conv2d_3x3(x, params.conv1b_w, params.conv1b_b));
  x = max_pool_2x2(x);
  x = relu(conv2d_3x3(x, params.conv2a_w, params.conv2a_b));
  x = relu(conv2d_3x3(x, params.conv2b_w, params.conv2b_b));
  x = max_pool_2x2(x);

  // [C x T' x F] -> [T' x (C * F)], channel-major within each frame.
  const int channels = x.dim(0), frames = x.dim(1), freq = x.dim(2);
  std::vector<int> index;
  index.reserve(x.size());
  for (int t = 0; t < frames; ++t) {
    for (int c = 0; c < channels; ++c) {
      for (int f = 0; f < freq; ++f) index.push_back((c * frames + t) * freq + f);
    }
  }
  x = gather(x, index, {frames, channels * freq});
  return blstm_forward(x, params.recurrent);
}

}  // namespace memr
