// src/ops.cc
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

#include "memr/ops.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "memr/errors.h"

namespace memr {

namespace {

using ImplPtr = std::shared_ptr<TensorImpl>;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMatrix>;
using ConstMatMap = Eigen::Map<const RowMatrix>;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Tape to record on, or nullptr when nothing needs a gradient.
Tape* recording_tape(std::initializer_list<const Tensor*> inputs) {
  Tape* tape = Tape::active();
  if (!tape) return nullptr;
  for (const Tensor* t : inputs) {
    if (t->requires_grad()) return tape;
  }
  return nullptr;
}

Tape* recording_tape(std::span<const Tensor> inputs) {
  Tape* tape = Tape::active();
  if (!tape) return nullptr;
  for (const Tensor& t : inputs) {
    if (t.requires_grad()) return tape;
  }
  return nullptr;
}

std::vector<double>& grad_of(TensorImpl* t) {
  if (t->grad.empty()) t->grad.assign(t->data.size(), 0.0);
  return t->grad;
}

void require_matrix(const Tensor& a, const char* op) {
  if (a.rank() != 2) {
    throw DimensionError(std::string(op) + ": expected a matrix, got " + shape_to_string(a.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_to_string(a.shape()) + " vs " +
                         shape_to_string(b.shape()));
  }
}

template <class Forward, class Derivative>
Tensor unary(const Tensor& a, Forward f, Derivative df) {
  std::vector<double> out(a.size());
  const auto in = a.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(in[i]);
  Tensor result(a.shape(), std::move(out));
  if (Tape* tape = recording_tape({&a})) {
    TensorImpl* ai = a.impl().get();
    TensorImpl* oi = result.impl().get();
    tape->record({a.impl()}, result.impl(), [ai, oi, df] {
      auto& g = grad_of(ai);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += oi->grad[i] * df(ai->data[i], oi->data[i]);
    });
  }
  return result;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  const int m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw DimensionError("matmul: inner dimensions disagree, " + shape_to_string(a.shape()) + " x " +
                         shape_to_string(b.shape()));
  }
  Tensor result({m, n});
  MatMap(result.mutable_data().data(), m, n).noalias() =
      ConstMatMap(a.data().data(), m, k) * ConstMatMap(b.data().data(), k, n);
  if (Tape* tape = recording_tape({&a, &b})) {
    TensorImpl* ai = a.impl().get();
    TensorImpl* bi = b.impl().get();
    TensorImpl* oi = result.impl().get();
    tape->record({a.impl(), b.impl()}, result.impl(), [ai, bi, oi, m, k, n] {
      ConstMatMap dout(oi->grad.data(), m, n);
      if (ai->requires_grad) {
        MatMap(grad_of(ai).data(), m, k).noalias() += dout * ConstMatMap(bi->data.data(), k, n).transpose();
      }
      if (bi->requires_grad) {
        MatMap(grad_of(bi).data(), k, n).noalias() += ConstMatMap(ai->data.data(), m, k).transpose() * dout;
      }
    });
  }
  return result;
}

Tensor transpose(const Tensor& a) {
  require_matrix(a, "transpose");
  const int m = a.rows(), n = a.cols();
  Tensor result({n, m});
  MatMap(result.mutable_data().data(), n, m) = ConstMatMap(a.data().data(), m, n).transpose();
  if (Tape* tape = recording_tape({&a})) {
    TensorImpl* ai = a.impl().get();
    TensorImpl* oi = result.impl().get();
    tape->record({a.impl()}, result.impl(), [ai, oi, m, n] {
      MatMap(grad_of(ai).data(), m, n) += ConstMatMap(oi->grad.data(), n, m).transpose();
    });
  }
  return result;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  Tensor result(a.shape(), std::move(out));
  if (Tape* tape = recording_tape({&a, &b})) {
    TensorImpl* ai = a.impl().get();
    TensorImpl* bi = b.impl().get();
    TensorImpl* oi = result.impl().get();
    tape->record({a.impl(), b.impl()}, result.impl(), [ai, bi, oi] {
      for (TensorImpl* t : {ai, bi}) {
        if (!t->requires_grad) continue;
        auto& g = grad_of(t);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += oi->grad[i];
      }
    });
  }
  return result;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  Tensor result(a.shape(), std::move(out));
  if (Tape* tape = recording_tape({&a, &b})) {
    TensorImpl* ai = a.impl().get();
    TensorImpl* bi = b.impl().get();
    TensorImpl* oi = result.impl().get();
    tape->record({a.impl(), b.impl()}, result.impl(), [ai, bi, oi] {
      if (ai->requires_grad) {
        auto& g = grad_of(ai);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += oi->grad[i];
      }
      if (bi->requires_grad) {
        auto& g = grad_of(bi);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] -= oi->grad[i];
      }
    });
  }
  return result;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
  Tensor result(a.shape(), std::move(out));
  if (Tape* tape = recording_tape({&a, &b})) {
    TensorImpl* ai = a.impl().get();
    TensorImpl* bi = b.impl().get();
    TensorImpl* oi = result.impl().get();
    tape->record({a.impl(), b.impl()}, result.impl(), [ai, bi, oi] {
      if (ai->requires_grad) {
        auto& g = grad_of(ai);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += oi->grad[i] * bi->data[i];
      }
      if (bi->requires_grad) {
        auto& g = grad_of(bi);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += oi->grad[i] * ai->data[i];
      }
    });
  }
  return result;
}

Tensor scale(const Tensor& a, double factor) {
  return unary(a, [factor](double x) { return factor * x; }, [factor](double, double) { return factor; });
}

Tensor add_row_broadcast(const Tensor& a, const Tensor& bias) {
  require_matrix(a, "add_row_broadcast");
  const int m = a.rows(), n = a.cols();
  if (bias.size() != static_cast<std::size_t>(n)) {
    throw DimensionError("add_row_broadcast: bias " + shape_to_string(bias.shape()) + " vs matrix " +
                         shape_to_string(a.shape()));
  }
  std::vector<double> out(a.size());
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < n; ++c) out[static_cast<std::size_t>(r) * n + c] = a[static_cast<std::size_t>(r) * n + c] + bias[c];
  }
  Tensor result(a.shape(), std::move(out));
  if (Tape* tape = recording_tape({&a, &bias})) {
    TensorImpl* ai = a.impl().get();
    TensorImpl* bi = bias.impl().get();
    TensorImpl* oi = result.impl().get();
    tape->record({a.impl(), bias.impl()}, result.impl(), [ai, bi, oi, m, n] {
      if (ai->requires_grad) {
        auto& g = grad_of(ai);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += oi->grad[i];
      }
      if (bi->requires_grad) {
        auto& g = grad_of(bi);
        for (int r = 0; r < m; ++r) {
          for (int c = 0; c < n; ++c) g[c] += oi->grad[static_cast<std::size_t>(r) * n + c];
        }
      }
    });
  }
  return result;
}

Tensor sigmoid(const Tensor& a) {
  return unary(
      a,
      [](double x) {
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& a) {
  return unary(a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor relu(const Tensor& a) {
  return unary(a, [](double x) { return x > 0 ? x : 0.0; }, [](double x, double) { return x > 0 ? 1.0 : 0.0; });
}

Tensor exp(const Tensor& a) {
  return unary(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
  return unary(a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

namespace {

// Row max, validating that the row can be normalised.
double checked_row_max(const double* row, int n) {
  double m = kNegInf;
  for (int c = 0; c < n; ++c) {
    if (std::isnan(row[c]) || row[c] == std::numeric_limits<double>::infinity()) {
      throw NumericError("softmax: non-finite input");
    }
    m = std::max(m, row[c]);
  }
  if (m == kNegInf) throw NumericError("softmax: row has no finite entry");
  return m;
}

}  // namespace

Tensor softmax_rows(const Tensor& a) {
  require_matrix(a, "softmax_rows");
  const int m = a.rows(), n = a.cols();
  std::vector<double> out(a.size());
  for (int r = 0; r < m; ++r) {
    const double* in = a.data().data() + static_cast<std::size_t>(r) * n;
    double* o = out.data() + static_cast<std::size_t>(r) * n;
    const double mx = checked_row_max(in, n);
    double z = 0;
    for (int c = 0; c < n; ++c) z += (o[c] = std::exp(in[c] - mx));
    for (int c = 0; c < n; ++c) o[c] /= z;
  }
  Tensor result(a.shape(), std::move(out));
  if (Tape* tape = recording_tape({&a})) {
    TensorImpl* ai = a.impl().get();
    TensorImpl* oi = result.impl().get();
    tape->record({a.impl()}, result.impl(), [ai, oi, m, n] {
      auto& g = grad_of(ai);
      for (int r = 0; r < m; ++r) {
        const std::size_t off = static_cast<std::size_t>(r) * n;
        double dot = 0;
        for (int c = 0; c < n; ++c) dot += oi->grad[off + c] * oi->data[off + c];
        for (int c = 0; c < n; ++c) g[off + c] += oi->data[off + c] * (oi->grad[off + c] - dot);
      }
    });
  }
  return result;
}

Tensor log_softmax_rows(const Tensor& a) {
  require_matrix(a, "log_softmax_rows");
  const int m = a.rows(), n = a.cols();
  std::vector<double> out(a.size());
  for (int r = 0; r < m; ++r) {
    const double* in = a.data().data() + static_cast<std::size_t>(r) * n;
    double* o = out.data() + static_cast<std::size_t>(r) * n;
    const double mx = checked_row_max(in, n);
    double z = 0;
    for (int c = 0; c < n; ++c) z += std::exp(in[c] - mx);
    const double lz = mx + std::log(z);
    for (int c = 0; c < n; ++c) o[c] = in[c] - lz;
  }
  Tensor result(a.shape(), std::move(out));
  if (Tape* tape = recording_tape({&a})) {
    TensorImpl* ai = a.impl().get();
    TensorImpl* oi = result.impl().get();
    tape->record({a.impl()}, result.impl(), [ai, oi, m, n] {
      auto& g = grad_of(ai);
      for (int r = 0; r < m; ++r) {
        const std::size_t off = static_cast<std::size_t>(r) * n;
        double total = 0;
        for (int c = 0; c < n; ++c) total += oi->grad[off + c];
        for (int c = 0; c < n; ++c) g[off + c] += oi->grad[off + c] - std::exp(oi->data[off + c]) * total;
      }
    });
  }
  return result;
}

Tensor sum(const Tensor& a) {
  double s = 0;
  for (double v : a.data()) s += v;
  Tensor result = Tensor::scalar(s);
  if (Tape* tape = recording_tape({&a})) {
    TensorImpl* ai = a.impl().get();
    TensorImpl* oi = result.impl().get();
    tape->record({a.impl()}, result.impl(), [ai, oi] {
      auto& g = grad_of(ai);
      for (double& v : g) v += oi->grad[0];
    });
  }
  return result;
}

Tensor logsumexp_all(const Tensor& a) {
  Tensor result = Tensor::scalar(log_sum_exp(a.data()));
  if (Tape* tape = recording_tape({&a})) {
    TensorImpl* ai = a.impl().get();
    TensorImpl* oi = result.impl().get();
    tape->record({a.impl()}, result.impl(), [ai, oi] {
      const double out = oi->data[0];
      if (out == kNegInf) return;
      auto& g = grad_of(ai);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += oi->grad[0] * std::exp(ai->data[i] - out);
    });
  }
  return result;
}

Tensor log_add_exp(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "log_add_exp");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = log_add_exp(a[i], b[i]);
  Tensor result(a.shape(), std::move(out));
  if (Tape* tape = recording_tape({&a, &b})) {
    TensorImpl* ai = a.impl().get();
    TensorImpl* bi = b.impl().get();
    TensorImpl* oi = result.impl().get();
    tape->record({a.impl(), b.impl()}, result.impl(), [ai, bi, oi] {
      for (TensorImpl* t : {ai, bi}) {
        if (!t->requires_grad) continue;
        auto& g = grad_of(t);
        for (std::size_t i = 0; i < g.size(); ++i) {
          if (oi->data[i] == kNegInf) continue;
          g[i] += oi->grad[i] * std::exp(t->data[i] - oi->data[i]);
        }
      }
    });
  }
  return result;
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_size(shape) != a.size()) {
    throw DimensionError("reshape: " + shape_to_string(a.shape()) + " to " + shape_to_string(shape));
  }
  Tensor result(std::move(shape), std::vector<double>(a.data().begin(), a.data().end()));
  if (Tape* tape = recording_tape({&a})) {
    TensorImpl* ai = a.impl().get();
    TensorImpl* oi = result.impl().get();
    tape->record({a.impl()}, result.impl(), [ai, oi] {
      auto& g = grad_of(ai);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += oi->grad[i];
    });
  }
  return result;
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw ContractError("concat_cols: no inputs");
  const int m = parts[0].rows();
  int n = 0;
  std::vector<int> offsets;
  for (const Tensor& p : parts) {
    if (p.rows() != m) {
      throw DimensionError("concat_cols: row mismatch " + shape_to_string(parts[0].shape()) + " vs " +
                           shape_to_string(p.shape()));
    }
    offsets.push_back(n);
    n += p.cols();
  }
  std::vector<double> out(static_cast<std::size_t>(m) * n);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const int w = parts[k].cols();
    for (int r = 0; r < m; ++r) {
      std::copy_n(parts[k].data().data() + static_cast<std::size_t>(r) * w, w,
                  out.data() + static_cast<std::size_t>(r) * n + offsets[k]);
    }
  }
  Tensor result({m, n}, std::move(out));
  if (Tape* tape = recording_tape(parts)) {
    std::vector<ImplPtr> inputs;
    for (const Tensor& p : parts) inputs.push_back(p.impl());
    std::vector<TensorImpl*> raw;
    for (const auto& p : inputs) raw.push_back(p.get());
    TensorImpl* oi = result.impl().get();
    tape->record(std::move(inputs), result.impl(), [raw, offsets, oi, m, n] {
      for (std::size_t k = 0; k < raw.size(); ++k) {
        if (!raw[k]->requires_grad) continue;
        auto& g = grad_of(raw[k]);
        const int w = raw[k]->shape[1];
        for (int r = 0; r < m; ++r) {
          for (int c = 0; c < w; ++c) {
            g[static_cast<std::size_t>(r) * w + c] += oi->grad[static_cast<std::size_t>(r) * n + offsets[k] + c];
          }
        }
      }
    });
  }
  return result;
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw ContractError("concat_rows: no inputs");
  const int n = parts[0].cols();
  int m = 0;
  for (const Tensor& p : parts) {
    if (p.cols() != n) {
      throw DimensionError("concat_rows: column mismatch " + shape_to_string(parts[0].shape()) + " vs " +
                           shape_to_string(p.shape()));
    }
    m += p.rows();
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m) * n);
  for (const Tensor& p : parts) out.insert(out.end(), p.data().begin(), p.data().end());
  Tensor result({m, n}, std::move(out));
  if (Tape* tape = recording_tape(parts)) {
    std::vector<ImplPtr> inputs;
    for (const Tensor& p : parts) inputs.push_back(p.impl());
    std::vector<TensorImpl*> raw;
    for (const auto& p : inputs) raw.push_back(p.get());
    TensorImpl* oi = result.impl().get();
    tape->record(std::move(inputs), result.impl(), [raw, oi] {
      std::size_t off = 0;
      for (TensorImpl* t : raw) {
        if (t->requires_grad) {
          auto& g = grad_of(t);
          for (std::size_t i = 0; i < g.size(); ++i) g[i] += oi->grad[off + i];
        }
        off += t->data.size();
      }
    });
  }
  return result;
}

Tensor slice_cols(const Tensor& a, int begin, int end) {
  require_matrix(a, "slice_cols");
  const int m = a.rows(), n = a.cols();
  if (begin < 0 || end > n || begin >= end) {
    throw DimensionError("slice_cols: [" + std::to_string(begin) + ", " + std::to_string(end) + ") of " +
                         shape_to_string(a.shape()));
  }
  const int w = end - begin;
  std::vector<double> out(static_cast<std::size_t>(m) * w);
  for (int r = 0; r < m; ++r) {
    std::copy_n(a.data().data() + static_cast<std::size_t>(r) * n + begin, w,
                out.data() + static_cast<std::size_t>(r) * w);
  }
  Tensor result({m, w}, std::move(out));
  if (Tape* tape = recording_tape({&a})) {
    TensorImpl* ai = a.impl().get();
    TensorImpl* oi = result.impl().get();
    tape->record({a.impl()}, result.impl(), [ai, oi, m, n, w, begin] {
      auto& g = grad_of(ai);
      for (int r = 0; r < m; ++r) {
        for (int c = 0; c < w; ++c) {
          g[static_cast<std::size_t>(r) * n + begin + c] += oi->grad[static_cast<std::size_t>(r) * w + c];
        }
      }
    });
  }
  return result;
}

Tensor slice_rows(const Tensor& a, int begin, int end) {
  require_matrix(a, "slice_rows");
  const int m = a.rows(), n = a.cols();
  if (begin < 0 || end > m || begin >= end) {
    throw DimensionError("slice_rows: [" + std::to_string(begin) + ", " + std::to_string(end) + ") of " +
                         shape_to_string(a.shape()));
  }
  const auto first = a.data().begin() + static_cast<std::ptrdiff_t>(begin) * n;
  const auto last = a.data().begin() + static_cast<std::ptrdiff_t>(end) * n;
  Tensor result({end - begin, n}, std::vector<double>(first, last));
  if (Tape* tape = recording_tape({&a})) {
    TensorImpl* ai = a.impl().get();
    TensorImpl* oi = result.impl().get();
    const std::size_t off = static_cast<std::size_t>(begin) * n;
    tape->record({a.impl()}, result.impl(), [ai, oi, off] {
      auto& g = grad_of(ai);
      for (std::size_t i = 0; i < oi->grad.size(); ++i) g[off + i] += oi->grad[i];
    });
  }
  return result;
}

Tensor gather(const Tensor& a, std::span<const int> index, Shape out_shape, double fill) {
  if (shape_size(out_shape) != index.size()) {
    throw DimensionError("gather: " + std::to_string(index.size()) + " indices for output " +
                         shape_to_string(out_shape));
  }
  const int limit = static_cast<int>(a.size());
  std::vector<int> idx(index.begin(), index.end());
  std::vector<double> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= limit) throw DimensionError("gather: index " + std::to_string(idx[i]) + " out of range");
    out[i] = idx[i] < 0 ? fill : a[static_cast<std::size_t>(idx[i])];
  }
  Tensor result(std::move(out_shape), std::move(out));
  if (Tape* tape = recording_tape({&a})) {
    TensorImpl* ai = a.impl().get();
    TensorImpl* oi = result.impl().get();
    tape->record({a.impl()}, result.impl(), [ai, oi, idx = std::move(idx)] {
      auto& g = grad_of(ai);
      for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= 0) g[static_cast<std::size_t>(idx[i])] += oi->grad[i];
      }
    });
  }
  return result;
}

Tensor conv2d_3x3(const Tensor& input, const Tensor& weight, const Tensor& bias) {
  if (input.rank() != 3 || weight.rank() != 4 || weight.dim(2) != 3 || weight.dim(3) != 3 ||
      weight.dim(1) != input.dim(0) || bias.size() != static_cast<std::size_t>(weight.dim(0))) {
    throw DimensionError("conv2d_3x3: input " + shape_to_string(input.shape()) + ", weight " +
                         shape_to_string(weight.shape()) + ", bias " + shape_to_string(bias.shape()));
  }
  const int cin = input.dim(0), h = input.dim(1), w = input.dim(2), cout = weight.dim(0);
  const int patch = cin * 9, pixels = h * w;

  // im2col: cols[(ci, ky, kx), (y, x)] = input[ci, y + ky - 1, x + kx - 1]
  auto cols = std::make_shared<std::vector<double>>(static_cast<std::size_t>(patch) * pixels, 0.0);
  const double* in = input.data().data();
  for (int ci = 0; ci < cin; ++ci) {
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        double* dst = cols->data() + static_cast<std::size_t>(ci * 9 + ky * 3 + kx) * pixels;
        for (int y = 0; y < h; ++y) {
          const int sy = y + ky - 1;
          if (sy < 0 || sy >= h) continue;
          const double* src = in + (static_cast<std::size_t>(ci) * h + sy) * w;
          for (int x = 0; x < w; ++x) {
            const int sx = x + kx - 1;
            if (sx >= 0 && sx < w) dst[y * w + x] = src[sx];
          }
        }
      }
    }
  }

  Tensor result({cout, h, w});
  MatMap out(result.mutable_data().data(), cout, pixels);
  out.noalias() = ConstMatMap(weight.data().data(), cout, patch) * ConstMatMap(cols->data(), patch, pixels);
  for (int co = 0; co < cout; ++co) out.row(co).array() += bias[co];

  if (Tape* tape = recording_tape({&input, &weight, &bias})) {
    TensorImpl* ii = input.impl().get();
    TensorImpl* wi = weight.impl().get();
    TensorImpl* bi = bias.impl().get();
    TensorImpl* oi = result.impl().get();
    tape->record({input.impl(), weight.impl(), bias.impl()}, result.impl(),
                 [ii, wi, bi, oi, cols, cin, h, w, cout, patch, pixels] {
                   ConstMatMap dout(oi->grad.data(), cout, pixels);
                   if (wi->requires_grad) {
                     MatMap(grad_of(wi).data(), cout, patch).noalias() +=
                         dout * ConstMatMap(cols->data(), patch, pixels).transpose();
                   }
                   if (bi->requires_grad) {
                     auto& g = grad_of(bi);
                     for (int co = 0; co < cout; ++co) g[co] += dout.row(co).sum();
                   }
                   if (ii->requires_grad) {
                     RowMatrix dcols = ConstMatMap(wi->data.data(), cout, patch).transpose() * dout;
                     auto& g = grad_of(ii);
                     for (int ci = 0; ci < cin; ++ci) {
                       for (int ky = 0; ky < 3; ++ky) {
                         for (int kx = 0; kx < 3; ++kx) {
                           const double* src = dcols.data() + static_cast<std::size_t>(ci * 9 + ky * 3 + kx) * pixels;
                           for (int y = 0; y < h; ++y) {
                             const int sy = y + ky - 1;
                             if (sy < 0 || sy >= h) continue;
                             double* dst = g.data() + (static_cast<std::size_t>(ci) * h + sy) * w;
                             for (int x = 0; x < w; ++x) {
                               const int sx = x + kx - 1;
                               if (sx >= 0 && sx < w) dst[sx] += src[y * w + x];
                             }
                           }
                         }
                       }
                     }
                   }
                 });
  }
  return result;
}

Tensor max_pool_2x2(const Tensor& input) {
  if (input.rank() != 3) throw DimensionError("max_pool_2x2: expected [C x H x W], got " + shape_to_string(input.shape()));
  const int c = input.dim(0), h = input.dim(1), w = input.dim(2);
  const int oh = (h + 1) / 2, ow = (w + 1) / 2;
  std::vector<double> out(static_cast<std::size_t>(c) * oh * ow);
  std::vector<int> argmax(out.size());
  const double* in = input.data().data();
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        double best = -std::numeric_limits<double>::infinity();
        int best_idx = -1;
        for (int dy = 0; dy < 2 && 2 * y + dy < h; ++dy) {
          for (int dx = 0; dx < 2 && 2 * x + dx < w; ++dx) {
            const int idx = (ch * h + 2 * y + dy) * w + 2 * x + dx;
            if (best_idx < 0 || in[idx] > best) {
              best = in[idx];
              best_idx = idx;
            }
          }
        }
        const std::size_t o = (static_cast<std::size_t>(ch) * oh + y) * ow + x;
        out[o] = best;
        argmax[o] = best_idx;
      }
    }
  }
  Tensor result({c, oh, ow}, std::move(out));
  if (Tape* tape = recording_tape({&input})) {
    TensorImpl* ii = input.impl().get();
    TensorImpl* oi = result.impl().get();
    tape->record({input.impl()}, result.impl(), [ii, oi, argmax = std::move(argmax)] {
      auto& g = grad_of(ii);
      for (std::size_t o = 0; o < argmax.size(); ++o) g[static_cast<std::size_t>(argmax[o])] += oi->grad[o];
    });
  }
  return result;
}

double log_sum_exp(std::span<const double> values) {
  double m = kNegInf;
  for (double v : values) m = std::max(m, v);
  if (m == kNegInf) return kNegInf;
  double s = 0;
  for (double v : values) s += std::exp(v - m);
  return m + std::log(s);
}

double log_add_exp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kNegInf) return a;
  return a + std::log1p(std::exp(b - a));
}

}  // namespace memr
