// include/memr/optimizer.h
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

#include <vector>

#include "memr/tensor.h"

namespace memr {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 5.0;  // global gradient-norm clip; <= 0 disables
};

// Adam over a fixed parameter list. step() consumes and clears the
// accumulated gradients; parameters without a gradient are left untouched.
class Adam {
 public:
  Adam(std::vector<Tensor> params, AdamConfig cfg);

  // Returns the pre-clip global gradient norm.
  double step();
  int steps() const { return t_; }

 private:
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  AdamConfig cfg_;
  int t_ = 0;
};

}  // namespace memr
