// tools/memr_cli.cc
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

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "memr/checkpoint.h"
#include "memr/config.h"
#include "memr/data.h"
#include "memr/errors.h"
#include "memr/evaluate.h"
#include "memr/gradsuite.h"
#include "memr/lm.h"
#include "memr/train.h"

namespace fs = std::filesystem;
using namespace memr;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

RunConfig load_run_config(const std::string& path, ConfigMap* entries_out = nullptr) {
  RunConfig run;
  if (path.empty()) return run;
  const ConfigMap entries = read_config_file(path);
  apply_config(entries, run);
  if (entries_out) *entries_out = entries;
  return run;
}

// Takes vocabulary size and feature width from the data unless the config
// pins them, in which case they must agree.
void reconcile_with_data(RunConfig& run, const ConfigMap& entries, const Dataset& data) {
  ModelConfig& m = run.train.model;
  const int width = data.utterances.empty() ? m.encoder.input_dim : data.utterances.front().features.cols();
  if (entries.count("vocab") && m.num_letters != data.vocab_size) {
    throw DataError("config vocab " + std::to_string(m.num_letters) + " does not match dataset vocab " +
                    std::to_string(data.vocab_size));
  }
  if (entries.count("input_dim") && m.encoder.input_dim != width) {
    throw DataError("config input_dim " + std::to_string(m.encoder.input_dim) + " does not match feature width " +
                    std::to_string(width));
  }
  m.num_letters = data.vocab_size;
  m.encoder.input_dim = width;
  run.lm.num_letters = data.vocab_size;
}

int cmd_gen(std::uint64_t seed, int vocab, int n, int split, std::optional<double> sigma, const std::string& config,
            const std::string& out) {
  RunConfig run = load_run_config(config);
  SynthConfig sc = run.data;
  sc.seed = seed;
  sc.vocab_size = vocab;
  sc.n_utts = n;
  sc.split = split;
  if (sigma) sc.noise_sigma = *sigma;
  save_dataset(out, Dataset{vocab, synth_dataset(sc)});
  std::cout << "wrote " << n << " utterances to " << out << '\n';
  return 0;
}

int cmd_train(const std::string& config, const std::string& data_dir, const std::string& out, std::string metrics) {
  ConfigMap entries;
  RunConfig run = load_run_config(config, &entries);
  const Dataset data = load_dataset(data_dir);
  reconcile_with_data(run, entries, data);
  if (metrics.empty()) metrics = out + ".metrics.csv";
  std::cout << std::setprecision(6);
  const TrainResult result = train(run.train, data.utterances, [](const EpochMetrics& m, const Model&) {
    std::cout << "epoch " << m.epoch << "  loss " << m.mtl_loss << "  ctc1 " << m.ctc1 << "  ctc2 " << m.ctc2
              << "  att " << m.att;
    if (m.skipped) std::cout << "  skipped " << m.skipped;
    std::cout << std::endl;
  });
  save_model(result.model, out);
  std::ofstream csv(metrics);
  if (!csv) throw DataError("cannot write " + metrics);
  write_metrics_csv(csv, result.history);
  return 0;
}

int cmd_decode(const std::string& model_path, const std::string& lm_path, const std::string& data_dir,
               const DecodeConfig& dc, const std::string& out) {
  dc.validate();
  const Model model = load_model(model_path);
  std::optional<LanguageModel> lm;
  if (!lm_path.empty()) {
    lm.emplace(load_lm(lm_path));
    if (lm->config().num_letters != model.config().num_letters) {
      throw DataError("LM vocabulary does not match the model vocabulary");
    }
  }
  const Dataset data = load_dataset(data_dir);
  if (data.vocab_size != model.config().num_letters) throw DataError("dataset vocabulary does not match the model");
  const EvalResult result = evaluate(model, data.utterances, lm ? &*lm : nullptr, dc);

  std::ofstream hyp(out);
  if (!hyp) throw DataError("cannot write " + out);
  const Vocabulary vocab = model.vocabulary();
  write_hypotheses(hyp, result, vocab);

  const fs::path nbest_dir = out + ".nbest";
  fs::create_directories(nbest_dir);
  int truncated = 0;
  for (const auto& u : result.utterances) {
    std::ofstream f(nbest_dir / (u.id + ".txt"));
    write_nbest(f, u.decode, vocab);
    truncated += u.decode.truncated;
  }
  std::cout << "decoded " << result.utterances.size() << " utterances";
  if (truncated) std::cout << " (" << truncated << " hit max_len)";
  std::cout << "\nCER\t" << result.cer << '\n';
  return 0;
}

// "id<TAB>a b c" lines in file order.
std::vector<std::pair<std::string, LabelSequence>> read_transcripts(const std::string& path, const Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path);
  std::vector<std::pair<std::string, LabelSequence>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    const std::string id = line.substr(0, tab);
    try {
      out.emplace_back(id, tab == std::string::npos ? LabelSequence{} : vocab.parse(line.substr(tab + 1)));
    } catch (const VocabularyError& e) {
      throw DataError(path + ", " + id + ": " + e.what());
    }
  }
  return out;
}

// The reference is a dataset directory or a transcript file.
int cmd_eval(const std::string& ref_path, const std::string& hyp_path) {
  std::vector<std::pair<std::string, LabelSequence>> refs_by_id;
  int letters = 26;
  if (std::filesystem::is_directory(ref_path)) {
    const Dataset data = load_dataset(ref_path);
    letters = data.vocab_size;
    for (const auto& u : data.utterances) refs_by_id.emplace_back(u.id, u.labels);
  } else {
    refs_by_id = read_transcripts(ref_path, Vocabulary(letters));
  }
  std::map<std::string, LabelSequence> hyps;
  for (auto& [id, seq] : read_transcripts(hyp_path, Vocabulary(letters))) hyps[id] = std::move(seq);
  std::vector<LabelSequence> refs, matched;
  for (const auto& [id, ref] : refs_by_id) {
    auto it = hyps.find(id);
    if (it == hyps.end()) throw DataError("no hypothesis for utterance " + id);
    refs.push_back(ref);
    matched.push_back(it->second);
  }
  std::cout << "CER\t" << std::setprecision(10) << corpus_cer(refs, matched) << '\n';
  return 0;
}

int cmd_gradcheck(std::uint64_t seed) {
  const auto cases = run_gradient_suite(seed);
  print_gradient_report(std::cout, cases);
  int failed = 0;
  for (const auto& c : cases) failed += !c.passed();
  std::cout << (failed ? "FAILED " : "passed ") << cases.size() - failed << "/" << cases.size() << '\n';
  return failed ? kExitNumeric : 0;
}

int cmd_lm_train(const std::string& config, const std::string& data_dir, const std::string& out) {
  RunConfig run = load_run_config(config);
  const Dataset data = load_dataset(data_dir);
  run.lm.num_letters = data.vocab_size;
  const LmTrainResult result = lm_train(data.label_corpus(), run.lm, run.lm_train);
  save_lm(result.model, out);
  std::cout << "perplexity\t" << result.perplexity << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stream joint CTC/attention letter recognizer"};
  app.require_subcommand(1);

  std::string config, data_dir, out;

  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
  std::uint64_t gen_seed = 1;
  int gen_vocab = 6, gen_n = 50, gen_split = 0;
  std::optional<double> gen_sigma;
  gen->add_option("--seed", gen_seed, "dataset seed")->required();
  gen->add_option("--vocab", gen_vocab, "number of letters")->required();
  gen->add_option("--n", gen_n, "number of utterances")->required();
  gen->add_option("--split", gen_split, "independent split index over the same letter prototypes");
  gen->add_option("--sigma", gen_sigma, "feature noise standard deviation");
  gen->add_option("--config", config, "config file for the remaining generator settings");
  gen->add_option("--out", out, "output directory")->required();

  auto* tr = app.add_subcommand("train", "train a model");
  std::string metrics;
  tr->add_option("--config", config, "config file (key = value)");
  tr->add_option("--data", data_dir, "dataset directory")->required();
  tr->add_option("--out", out, "model checkpoint path")->required();
  tr->add_option("--metrics", metrics, "per-epoch CSV (default: <out>.metrics.csv)");

  auto* dec = app.add_subcommand("decode", "joint beam search over a dataset");
  std::string model_path, lm_path;
  DecodeConfig dc;
  dec->add_option("--model", model_path, "model checkpoint")->required();
  dec->add_option("--lm", lm_path, "language model checkpoint");
  dec->add_option("--data", data_dir, "dataset directory")->required();
  dec->add_option("--lambda", dc.lambda, "CTC weight")->capture_default_str();
  dec->add_option("--gamma", dc.gamma, "LM weight")->capture_default_str();
  dec->add_option("--beam", dc.beam_width, "beam width")->capture_default_str();
  dec->add_option("--max-len", dc.max_len, "longest hypothesis")->capture_default_str();
  dec->add_option("--out", out, "hypothesis file; n-best lists go to <out>.nbest/")->required();

  auto* ev = app.add_subcommand("eval", "character error rate of a hypothesis file");
  std::string ref_path, hyp_path;
  ev->add_option("--ref", ref_path, "reference dataset directory or transcript file")->required();
  ev->add_option("--hyp", hyp_path, "hypothesis file")->required();

  auto* gc = app.add_subcommand("gradcheck", "finite-difference gradient suite");
  std::uint64_t gc_seed = 1;
  gc->add_option("--seed", gc_seed, "seed")->capture_default_str();

  auto* lmt = app.add_subcommand("lm-train", "train the letter language model on dataset labels");
  lmt->add_option("--config", config, "config file (lm_* keys)");
  lmt->add_option("--data", data_dir, "dataset directory")->required();
  lmt->add_option("--out", out, "LM checkpoint path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen) return cmd_gen(gen_seed, gen_vocab, gen_n, gen_split, gen_sigma, config, out);
    if (*tr) return cmd_train(config, data_dir, out, metrics);
    if (*dec) return cmd_decode(model_path, lm_path, data_dir, dc, out);
    if (*ev) return cmd_eval(ref_path, hyp_path);
    if (*gc) return cmd_gradcheck(gc_seed);
    if (*lmt) return cmd_lm_train(config, data_dir, out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << '\n';
    return kExitData;
  } catch (const VocabularyError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
