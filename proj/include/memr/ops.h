// include/memr/ops.h
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

#include <span>
#include <vector>

#include "memr/tensor.h"

// Differentiable operations. Each computes its value eagerly and, when a tape
// is active and an input requires a gradient, records its local gradient
// rule. Matrices are rank 2; "row vector" means a 1 x N matrix.
namespace memr {

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);  // elementwise
Tensor scale(const Tensor& a, double factor);
// a[M x N] + bias[1 x N] on every row.
Tensor add_row_broadcast(const Tensor& a, const Tensor& bias);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }

Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);

// Row-wise softmax with max subtraction. NaN input raises NumericError.
Tensor softmax_rows(const Tensor& a);
Tensor log_softmax_rows(const Tensor& a);

Tensor sum(const Tensor& a);                // -> scalar
Tensor logsumexp_all(const Tensor& a);      // -> scalar, -inf if all -inf
// Elementwise log(exp(a) + exp(b)); -inf operands get zero gradient.
Tensor log_add_exp(const Tensor& a, const Tensor& b);

Tensor reshape(const Tensor& a, Shape shape);
Tensor concat_cols(std::span<const Tensor> parts);
Tensor concat_rows(std::span<const Tensor> parts);
Tensor slice_cols(const Tensor& a, int begin, int end);
Tensor slice_rows(const Tensor& a, int begin, int end);

// out.flat[i] = a.flat[index[i]], or `fill` where index[i] < 0.
Tensor gather(const Tensor& a, std::span<const int> index, Shape out_shape,
              double fill = 0.0);

// 3x3 convolution, stride 1, zero padding 1.
//   input [Cin x H x W], weight [Cout x Cin x 3 x 3], bias [1 x Cout]
Tensor conv2d_3x3(const Tensor& input, const Tensor& weight, const Tensor& bias);
// 2x2 max pooling with stride 2 over the last two axes of [C x H x W]. Odd
// trailing edges form clipped windows, so the output is ceil(H/2) x ceil(W/2).
Tensor max_pool_2x2(const Tensor& input);

// Numerically stable log(sum(exp(v))) on plain values.
double log_sum_exp(std::span<const double> values);
double log_add_exp(double a, double b);

}  // namespace memr
