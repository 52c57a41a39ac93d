// src/gradcheck.cc
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

#include "memr/gradcheck.h"

#include <algorithm>
#include <cmath>

#include "memr/errors.h"

namespace memr {

namespace {

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1e-8, std::abs(numeric));
}

double evaluate(const std::function<Tensor()>& f) {
  NoGradScope no_grad;
  const double v = f().item();
  if (std::isnan(v)) throw NumericError("finite difference probe produced NaN");
  return v;
}

}  // namespace

double finite_diff_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x, double h) {
  Tensor probe = x.clone().set_requires_grad(true);
  return finite_diff_check_params([&] { return f(probe); }, {probe}, h);
}

double finite_diff_check_params(const std::function<Tensor()>& f, const std::vector<Tensor>& params, double h,
                                int max_coords_per_param) {
  for (Tensor p : params) {
    p.zero_grad();
    p.set_requires_grad(true);
  }
  {
    Tape tape;
    Tensor loss;
    {
      TapeScope scope(tape);
      loss = f();
    }
    tape.backward(loss);
  }

  double worst = 0;
  for (Tensor p : params) {
    const std::vector<double> analytic =
        p.has_grad() ? std::vector<double>(p.grad().begin(), p.grad().end()) : std::vector<double>(p.size(), 0.0);
    const std::size_t n = p.size();
    std::size_t stride = 1;
    if (max_coords_per_param > 0 && n > static_cast<std::size_t>(max_coords_per_param)) {
      stride = (n + max_coords_per_param - 1) / max_coords_per_param;
    }
    auto data = p.mutable_data();
    for (std::size_t i = 0; i < n; i += stride) {
      const double saved = data[i];
      data[i] = saved + h;
      const double plus = evaluate(f);
      data[i] = saved - h;
      const double minus = evaluate(f);
      data[i] = saved;
      worst = std::max(worst, relative_error(analytic[i], (plus - minus) / (2 * h)));
    }
    p.zero_grad();
  }
  return worst;
}

}  // namespace memr
