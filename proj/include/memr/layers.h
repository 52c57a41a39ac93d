// include/memr/layers.h
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
#include <utility>
#include <vector>

#include "memr/tensor.h"

namespace memr {

using NamedParams = std::vector<std::pair<std::string, Tensor>>;

// Affine map x[M x in] -> x W + b, W [in x out], b [1 x out].
struct Linear {
  Tensor weight;
  Tensor bias;

  static Linear init(int in, int out, Rng& rng);
  Tensor forward(const Tensor& x) const;
  void collect(const std::string& prefix, NamedParams& out) const;
};

// Standard LSTM cell. Gate columns are laid out as
// [input | forget | output | candidate], each hidden_width wide.
struct RecurrentCell {
  Tensor w_input;   // [input_width x 4 hidden_width]
  Tensor w_hidden;  // [hidden_width x 4 hidden_width]
  Tensor bias;      // [1 x 4 hidden_width]

  static RecurrentCell init(int input_width, int hidden_width, Rng& rng);
  int input_width() const { return w_input.rows(); }
  int hidden_width() const { return w_hidden.rows(); }
  void collect(const std::string& prefix, NamedParams& out) const;
};

struct LstmState {
  Tensor h;  // [1 x hidden]
  Tensor c;  // [1 x hidden]

  static LstmState zeros(int hidden_width);
};

LstmState lstm_cell_step(const RecurrentCell& cell, const Tensor& x_t, const LstmState& prev);

// Variant taking x_t W_input + bias already computed, so a whole sequence's
// input projection can be one matmul.
LstmState lstm_cell_step_projected(const RecurrentCell& cell, const Tensor& gates_in, const LstmState& prev);

}  // namespace memr
