// include/memr/config.h
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

#include <iosfwd>
#include <map>
#include <string>

#include "memr/data.h"
#include "memr/decoding.h"
#include "memr/lm.h"
#include "memr/train.h"

namespace memr {

using ConfigMap = std::map<std::string, std::string>;

// Flat "key = value" lines; '#' starts a comment. Malformed lines and
// repeated keys raise ConfigError.
ConfigMap parse_config(std::istream& in);
ConfigMap read_config_file(const std::string& path);

// Every tunable of a run, addressable from one config file.
struct RunConfig {
  TrainConfig train;
  DecodeConfig decode;
  SynthConfig data;
  LmConfig lm;
  LmTrainConfig lm_train;
};

// Applies known keys; an unknown key or unparsable value raises ConfigError.
void apply_config(const ConfigMap& entries, RunConfig& run);

// All keys understood by apply_config, for help output.
const std::map<std::string, std::string>& config_key_help();

}  // namespace memr
