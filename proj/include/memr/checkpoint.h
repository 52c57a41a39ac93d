// include/memr/checkpoint.h
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
#include <string>

#include "memr/layers.h"
#include "memr/lm.h"
#include "memr/model.h"

namespace memr {

// Binary layout, all integers little-endian:
//   "MEMR" | u32 version | u32 count |
//   count x ( u16 name_len | name | u8 rank | rank x u32 dim | f64 payload )
inline constexpr std::uint32_t kCheckpointVersion = 1;

void checkpoint_save(const NamedParams& tensors, const std::string& path);
// Fresh tensors in file order. Throws CheckpointFormatError (bad magic,
// malformed entry), CheckpointVersionError or CheckpointTruncatedError.
NamedParams checkpoint_load(const std::string& path);

// Copies loaded values into existing parameters by name. A missing entry
// raises CheckpointFormatError, a shape disagreement CheckpointShapeError;
// both name the parameter.
void load_into(const NamedParams& target, const NamedParams& loaded);

// Models and LMs carry their hyperparameters as scalar "config.*" entries
// so they can be rebuilt from the file alone.
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);
// Loads parameters into a model built from `cfg`.
Model load_model(const std::string& path, const ModelConfig& cfg);

void save_lm(const LanguageModel& lm, const std::string& path);
LanguageModel load_lm(const std::string& path);

}  // namespace memr
