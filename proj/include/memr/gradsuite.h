// include/memr/gradsuite.h
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

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace memr {

struct GradCheckCase {
  std::string name;
  double error = 0;      // max relative error over checked coordinates
  double tolerance = 0;
  bool passed() const { return error <= tolerance; }
};

// Finite-difference checks of every differentiable op and composite module
// on seeded random inputs, ending with the full multi-task loss on an
// 8-frame, 2-letter utterance.
std::vector<GradCheckCase> run_gradient_suite(std::uint64_t seed);

void print_gradient_report(std::ostream& os, const std::vector<GradCheckCase>& cases);

}  // namespace memr
