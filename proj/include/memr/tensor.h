// include/memr/tensor.h
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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace memr {

using Shape = std::vector<int>;

std::string shape_to_string(const Shape& shape);
std::size_t shape_size(const Shape& shape);

struct TensorImpl {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until a gradient is accumulated
  bool requires_grad = false;
  int node_id = -1;          // index of the producing tape record, -1 for leaves
};

// Dense row-major array of doubles with an optional gradient.
//
// Tensor is a cheap handle: copies share storage. Use clone() for a deep
// copy. Vectors are represented as 1 x N matrices throughout the library;
// scalars have an empty shape.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double value);
  static Tensor row(std::vector<double> values);
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor identity(int n);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const { return impl_->shape; }
  int rank() const { return static_cast<int>(impl_->shape.size()); }
  int dim(int axis) const { return impl_->shape.at(axis); }
  std::size_t size() const { return impl_->data.size(); }
  // Rows / cols of a rank-2 tensor.
  int rows() const;
  int cols() const;

  std::span<const double> data() const { return impl_->data; }
  std::span<double> mutable_data() { return impl_->data; }
  double item() const;
  double at(int r, int c) const;
  double operator[](std::size_t i) const { return impl_->data[i]; }

  bool requires_grad() const { return impl_->requires_grad; }
  Tensor& set_requires_grad(bool on);
  bool has_grad() const { return !impl_->grad.empty(); }
  // Gradient, or an empty span when none has been accumulated.
  std::span<const double> grad() const { return impl_->grad; }
  void zero_grad();
  int node_id() const { return impl_->node_id; }

  Tensor clone() const;   // deep copy of data, detached from the tape
  Tensor detach() const { return clone(); }

  const std::shared_ptr<TensorImpl>& impl() const { return impl_; }

 private:
  std::shared_ptr<TensorImpl> impl_;
};

// Reverse-mode tape. Operations record themselves on the tape that is
// active on the calling thread (see TapeScope); with no active tape the ops
// compute values only, which is how decoding runs.
//
// A tape supports exactly one backward pass.
class Tape {
 public:
  using BackwardFn = std::function<void()>;

  struct Record {
    std::vector<std::shared_ptr<TensorImpl>> inputs;
    std::shared_ptr<TensorImpl> output;
    BackwardFn backward;
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  int record(std::vector<std::shared_ptr<TensorImpl>> inputs,
             std::shared_ptr<TensorImpl> output, BackwardFn backward);

  // Seeds d(loss)/d(loss) = 1 and runs every record in reverse order.
  // Gradients accumulate into leaves (parameters). ContractError on a
  // non-scalar or foreign loss, and on any call after the first.
  void backward(const Tensor& loss);

  std::size_t size() const { return records_.size(); }
  bool consumed() const { return consumed_; }
  const std::vector<Record>& records() const { return records_; }

  static Tape* active();

 private:
  friend class TapeScope;
  std::vector<Record> records_;
  bool consumed_ = false;
};

// Makes `tape` the active tape for the current thread until destruction.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

// Suspends recording for the current thread.
class NoGradScope {
 public:
  NoGradScope();
  ~NoGradScope();
  NoGradScope(const NoGradScope&) = delete;
  NoGradScope& operator=(const NoGradScope&) = delete;

 private:
  Tape* previous_;
};

// Seeded generator. Every random quantity in the library flows through one.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform(double lo, double hi);
  double normal(double mean, double stddev);
  int uniform_int(int lo, int hi);  // inclusive
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

Tensor uniform(Shape shape, double lo, double hi, Rng& rng);
Tensor randn(Shape shape, Rng& rng, double stddev = 1.0);

}  // namespace memr
