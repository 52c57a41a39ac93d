// include/memr/gradcheck.h
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

#include <functional>
#include <vector>

#include "memr/tensor.h"

namespace memr {

// Compares the tape gradient of a scalar function against central
// differences. Returns max_i |analytic_i - numeric_i| / max(1e-8, |numeric_i|).
// `f` must be deterministic; it is evaluated once on a fresh tape and then
// 2 * size(x) times without one.
double finite_diff_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x, double h = 1e-5);

// Same measure over every coordinate of a set of parameters that `f` reads
// through shared handles. Parameters are perturbed in place and restored.
// A positive `max_coords_per_param` checks an evenly strided subset.
double finite_diff_check_params(const std::function<Tensor()>& f, const std::vector<Tensor>& params,
                                double h = 1e-5, int max_coords_per_param = 0);

}  // namespace memr
