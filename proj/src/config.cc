// src/config.cc
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

#include "memr/config.h"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>

#include "memr/errors.h"

namespace memr {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) throw ConfigError("config: bad value '" + value + "' for " + key);
  return out;
}

struct Setter {
  std::string help;
  std::function<void(RunConfig&, const std::string&, const std::string&)> apply;
};

template <class T, class Get>
Setter number(std::string help, Get get) {
  return Setter{std::move(help), [get](RunConfig& r, const std::string& k, const std::string& v) {
                  get(r) = parse_number<T>(k, v);
                }};
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    // training
    t["lambda"] = number<double>("CTC weight of the multi-task loss", [](RunConfig& r) -> double& { return r.train.lambda; });
    t["learning_rate"] = number<double>("Adam step size", [](RunConfig& r) -> double& { return r.train.learning_rate; });
    t["epochs"] = number<int>("training epochs", [](RunConfig& r) -> int& { return r.train.epochs; });
    t["seed"] = number<std::uint64_t>("parameter init and shuffling seed",
                                      [](RunConfig& r) -> std::uint64_t& { return r.train.seed; });
    t["clip_norm"] = number<double>("global gradient norm clip (<= 0 disables)",
                                    [](RunConfig& r) -> double& { return r.train.clip_norm; });
    // model
    t["vocab"] = Setter{"number of letters", [](RunConfig& r, const std::string& k, const std::string& v) {
                          const int n = parse_number<int>(k, v);
                          r.train.model.num_letters = n;
                          r.data.vocab_size = n;
                          r.lm.num_letters = n;
                        }};
    t["input_dim"] = Setter{"feature width D", [](RunConfig& r, const std::string& k, const std::string& v) {
                              const int n = parse_number<int>(k, v);
                              r.train.model.encoder.input_dim = n;
                              r.data.input_dim = n;
                            }};
    t["hidden"] = number<int>("encoder output width H", [](RunConfig& r) -> int& { return r.train.model.encoder.hidden; });
    t["blstm_layers"] = number<int>("recurrent layers of the full-rate encoder",
                                    [](RunConfig& r) -> int& { return r.train.model.encoder.blstm_layers; });
    t["vgg_channels1"] = number<int>("channels of the first conv block",
                                     [](RunConfig& r) -> int& { return r.train.model.encoder.vgg_channels1; });
    t["vgg_channels2"] = number<int>("channels of the second conv block",
                                     [](RunConfig& r) -> int& { return r.train.model.encoder.vgg_channels2; });
    t["vgg_recurrent_layers"] = number<int>("recurrent layers after the conv blocks",
                                            [](RunConfig& r) -> int& { return r.train.model.encoder.vgg_recurrent_layers; });
    t["attention_dim"] = number<int>("attention projection width",
                                     [](RunConfig& r) -> int& { return r.train.model.attention_dim; });
    t["decoder_hidden"] = number<int>("decoder LSTM width", [](RunConfig& r) -> int& { return r.train.model.decoder_hidden; });
    t["embed"] = number<int>("decoder letter embedding width", [](RunConfig& r) -> int& { return r.train.model.embed; });
    t["streams"] = Setter{"encoder streams: both, blstm or vgg", [](RunConfig& r, const std::string&, const std::string& v) {
                            r.train.model.streams = parse_stream_mode(v);
                          }};
    // decoding
    t["decode_lambda"] = number<double>("CTC weight at decode time", [](RunConfig& r) -> double& { return r.decode.lambda; });
    t["gamma"] = number<double>("LM weight at decode time", [](RunConfig& r) -> double& { return r.decode.gamma; });
    t["beam"] = number<int>("beam width", [](RunConfig& r) -> int& { return r.decode.beam_width; });
    t["max_len"] = number<int>("longest decoded sequence", [](RunConfig& r) -> int& { return r.decode.max_len; });
    // synthetic data
    t["data_seed"] = number<std::uint64_t>("dataset seed", [](RunConfig& r) -> std::uint64_t& { return r.data.seed; });
    t["split"] = number<int>("dataset split index", [](RunConfig& r) -> int& { return r.data.split; });
    t["n_utts"] = number<int>("utterances to generate", [](RunConfig& r) -> int& { return r.data.n_utts; });
    t["len_min"] = number<int>("minimum letters per utterance", [](RunConfig& r) -> int& { return r.data.len_min; });
    t["len_max"] = number<int>("maximum letters per utterance", [](RunConfig& r) -> int& { return r.data.len_max; });
    t["dur_min"] = number<int>("minimum frames per letter", [](RunConfig& r) -> int& { return r.data.dur_min; });
    t["dur_max"] = number<int>("maximum frames per letter", [](RunConfig& r) -> int& { return r.data.dur_max; });
    t["noise_sigma"] = number<double>("feature noise standard deviation",
                                      [](RunConfig& r) -> double& { return r.data.noise_sigma; });
    // language model
    t["lm_hidden"] = number<int>("LM LSTM width", [](RunConfig& r) -> int& { return r.lm.hidden; });
    t["lm_embed"] = number<int>("LM embedding width", [](RunConfig& r) -> int& { return r.lm.embed; });
    t["lm_epochs"] = number<int>("LM training epochs", [](RunConfig& r) -> int& { return r.lm_train.epochs; });
    t["lm_learning_rate"] = number<double>("LM Adam step size",
                                           [](RunConfig& r) -> double& { return r.lm_train.learning_rate; });
    t["lm_seed"] = number<std::uint64_t>("LM seed", [](RunConfig& r) -> std::uint64_t& { return r.lm_train.seed; });
    return t;
  }();
  return table;
}

}  // namespace

ConfigMap parse_config(std::istream& in) {
  ConfigMap out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key or value");
    if (!out.emplace(key, value).second) throw ConfigError("config: duplicate key " + key);
  }
  return out;
}

ConfigMap read_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path);
  return parse_config(f);
}

void apply_config(const ConfigMap& entries, RunConfig& run) {
  const auto& table = setters();
  for (const auto& [key, value] : entries) {
    auto it = table.find(key);
    if (it == table.end()) throw ConfigError("config: unknown key '" + key + "'");
    it->second.apply(run, key, value);
  }
}

const std::map<std::string, std::string>& config_key_help() {
  static const std::map<std::string, std::string> help = [] {
    std::map<std::string, std::string> h;
    for (const auto& [k, s] : setters()) h[k] = s.help;
    return h;
  }();
  return help;
}

}  // namespace memr
