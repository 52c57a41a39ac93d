// src/data.cc
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

#include "memr/data.h"

#include <filesystem>
#include <iomanip>
#include <fstream>
#include <map>
#include <sstream>

#include "memr/checkpoint.h"
#include "memr/config.h"
#include "memr/encoders.h"
#include "memr/errors.h"

namespace memr {

namespace fs = std::filesystem;

void SynthConfig::validate() const {
  if (vocab_size < 2 || vocab_size > 26) throw ConfigError("synth: vocab must be between 2 and 26");
  if (input_dim < 1) throw ConfigError("synth: input_dim must be positive");
  if (n_utts < 1) throw ConfigError("synth: need at least one utterance");
  if (len_min < 1 || len_max < len_min) throw ConfigError("synth: bad length range");
  if (dur_min < 2 || dur_max < dur_min) throw ConfigError("synth: duration range needs 2 <= dur_min <= dur_max");
  if (!(noise_sigma >= 0)) throw ConfigError("synth: noise_sigma must be non-negative");
  // Worst case: every adjacent pair repeats, so 2L - 1 quarter-rate frames
  // are needed, and runs can grow at most to dur_max.
  for (int len = len_min; len <= len_max; ++len) {
    if (vgg_output_frames(len * dur_max) < 2 * len - 1) {
      throw ConfigError("synth: " + std::to_string(len) + " letters of at most " + std::to_string(dur_max) +
                        " frames cannot always be aligned at 1/4 resolution");
    }
  }
}

Tensor letter_prototypes(std::uint64_t seed, int vocab_size, int input_dim) {
  Rng rng(seed);
  return randn({vocab_size, input_dim}, rng);
}

std::vector<Utterance> synth_dataset(const SynthConfig& cfg) {
  cfg.validate();
  const Tensor prototypes = letter_prototypes(cfg.seed, cfg.vocab_size, cfg.input_dim);
  Rng rng(cfg.seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(cfg.split + 1)));

  std::vector<Utterance> out;
  out.reserve(cfg.n_utts);
  for (int n = 0; n < cfg.n_utts; ++n) {
    Utterance utt;
    std::ostringstream id;
    id << "utt" << cfg.split << '-' << std::setw(5) << std::setfill('0') << n;
    utt.id = id.str();
    const int len = rng.uniform_int(cfg.len_min, cfg.len_max);
    std::vector<int> durations(len);
    for (int l = 0; l < len; ++l) {
      utt.labels.push_back(rng.uniform_int(1, cfg.vocab_size));
      durations[l] = rng.uniform_int(cfg.dur_min, cfg.dur_max);
    }
    // Lengthen runs round-robin until the quarter-rate stream can align.
    const int needed = ctc_min_frames(utt.labels);
    int total = 0;
    for (int d : durations) total += d;
    for (int l = 0; vgg_output_frames(total) < needed; l = (l + 1) % len) {
      if (durations[l] < cfg.dur_max) {
        ++durations[l];
        ++total;
      }
    }

    Tensor features({total, cfg.input_dim});
    auto data = features.mutable_data();
    int t = 0;
    for (int l = 0; l < len; ++l) {
      const int letter = utt.labels[l];
      for (int r = 0; r < durations[l]; ++r, ++t) {
        for (int d = 0; d < cfg.input_dim; ++d) {
          data[static_cast<std::size_t>(t) * cfg.input_dim + d] =
              prototypes.at(letter - 1, d) + (cfg.noise_sigma > 0 ? rng.normal(0.0, cfg.noise_sigma) : 0.0);
        }
      }
    }
    utt.features = std::move(features);
    out.push_back(std::move(utt));
  }
  return out;
}

std::vector<LabelSequence> Dataset::label_corpus() const {
  std::vector<LabelSequence> out;
  for (const auto& u : utterances) out.push_back(u.labels);
  return out;
}

void save_dataset(const std::string& dir, const Dataset& data) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create dataset directory " + dir + ": " + ec.message());
  const Vocabulary vocab(data.vocab_size);
  {
    std::ofstream meta(fs::path(dir) / "meta.txt");
    meta << "vocab = " << data.vocab_size << "\n";
    meta << "utterances = " << data.utterances.size() << "\n";
    std::ofstream labels(fs::path(dir) / "labels.txt");
    for (const auto& u : data.utterances) labels << u.id << '\t' << vocab.format(u.labels) << '\n';
    if (!meta || !labels) throw DataError("failed writing dataset text files in " + dir);
  }
  NamedParams feats;
  for (const auto& u : data.utterances) feats.emplace_back(u.id, u.features);
  checkpoint_save(feats, (fs::path(dir) / "features.ckpt").string());
}

Dataset load_dataset(const std::string& dir) {
  const fs::path root(dir);
  if (!fs::is_directory(root)) throw DataError("dataset directory not found: " + dir);
  Dataset data;
  try {
    const ConfigMap meta = read_config_file((root / "meta.txt").string());
    data.vocab_size = std::stoi(meta.at("vocab"));
  } catch (const std::out_of_range&) {
    throw DataError("meta.txt in " + dir + " lacks a vocab entry");
  } catch (const ConfigError& e) {
    throw DataError(std::string("bad meta.txt: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw DataError("meta.txt in " + dir + " has a non-numeric vocab");
  }
  const Vocabulary vocab(data.vocab_size);

  NamedParams feats;
  try {
    feats = checkpoint_load((root / "features.ckpt").string());
  } catch (const CheckpointError& e) {
    throw DataError(std::string("features.ckpt: ") + e.what());
  }
  std::map<std::string, Tensor> by_id(feats.begin(), feats.end());

  std::ifstream labels(root / "labels.txt");
  if (!labels) throw DataError("missing labels.txt in " + dir);
  std::string line;
  while (std::getline(labels, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw DataError("labels.txt: expected 'id<TAB>letters', got '" + line + "'");
    Utterance u;
    u.id = line.substr(0, tab);
    try {
      u.labels = vocab.parse(line.substr(tab + 1));
    } catch (const VocabularyError& e) {
      throw DataError("labels.txt, utterance " + u.id + ": " + e.what());
    }
    auto it = by_id.find(u.id);
    if (it == by_id.end()) throw DataError("no features for utterance " + u.id);
    u.features = it->second;
    data.utterances.push_back(std::move(u));
  }
  return data;
}

}  // namespace memr
