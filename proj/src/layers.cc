// src/layers.cc
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

#include "memr/layers.h"

#include <cmath>

#include "memr/errors.h"
#include "memr/ops.h"

namespace memr {

Linear Linear::init(int in, int out, Rng& rng) {
  const double k = 1.0 / std::sqrt(static_cast<double>(in));
  Linear l;
  l.weight = uniform({in, out}, -k, k, rng).set_requires_grad(true);
  l.bias = uniform({1, out}, -k, k, rng).set_requires_grad(true);
  return l;
}

Tensor Linear::forward(const Tensor& x) const { return add_row_broadcast(matmul(x, weight), bias); }

void Linear::collect(const std::string& prefix, NamedParams& out) const {
  out.emplace_back(prefix + ".weight", weight);
  out.emplace_back(prefix + ".bias", bias);
}

RecurrentCell RecurrentCell::init(int input_width, int hidden_width, Rng& rng) {
  const double k = 1.0 / std::sqrt(static_cast<double>(hidden_width));
  RecurrentCell cell;
  cell.w_input = uniform({input_width, 4 * hidden_width}, -k, k, rng).set_requires_grad(true);
  cell.w_hidden = uniform({hidden_width, 4 * hidden_width}, -k, k, rng).set_requires_grad(true);
  cell.bias = uniform({1, 4 * hidden_width}, -k, k, rng);
  // Open the forget gate at start.
  auto b = cell.bias.mutable_data();
  for (int i = hidden_width; i < 2 * hidden_width; ++i) b[i] += 1.0;
  cell.bias.set_requires_grad(true);
  return cell;
}

void RecurrentCell::collect(const std::string& prefix, NamedParams& out) const {
  out.emplace_back(prefix + ".w_input", w_input);
  out.emplace_back(prefix + ".w_hidden", w_hidden);
  out.emplace_back(prefix + ".bias", bias);
}

LstmState LstmState::zeros(int hidden_width) {
  return LstmState{Tensor({1, hidden_width}), Tensor({1, hidden_width})};
}

LstmState lstm_cell_step(const RecurrentCell& cell, const Tensor& x_t, const LstmState& prev) {
  if (x_t.rank() != 2 || x_t.rows() != 1 || x_t.cols() != cell.input_width()) {
    throw DimensionError("lstm_cell_step: input " + shape_to_string(x_t.shape()) + " for cell of width " +
                         std::to_string(cell.input_width()));
  }
  return lstm_cell_step_projected(cell, add(matmul(x_t, cell.w_input), cell.bias), prev);
}

LstmState lstm_cell_step_projected(const RecurrentCell& cell, const Tensor& gates_in, const LstmState& prev) {
  const int n = cell.hidden_width();
  if (prev.h.cols() != n || prev.c.cols() != n || gates_in.cols() != 4 * n) {
    throw DimensionError("lstm_cell_step: state " + shape_to_string(prev.h.shape()) + " / gates " +
                         shape_to_string(gates_in.shape()) + " for hidden width " + std::to_string(n));
  }
  const Tensor gates = add(gates_in, matmul(prev.h, cell.w_hidden));
  const Tensor in_gate = sigmoid(slice_cols(gates, 0, n));
  const Tensor forget_gate = sigmoid(slice_cols(gates, n, 2 * n));
  const Tensor out_gate = sigmoid(slice_cols(gates, 2 * n, 3 * n));
  const Tensor candidate = tanh(slice_cols(gates, 3 * n, 4 * n));
  Tensor c = forget_gate * prev.c + in_gate * candidate;
  Tensor h = out_gate * tanh(c);
  return LstmState{std::move(h), std::move(c)};
}

}  // namespace memr
