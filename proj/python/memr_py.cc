// python/memr_py.cc
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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <limits>

#include "memr/checkpoint.h"
#include "memr/config.h"
#include "memr/ctc.h"
#include "memr/errors.h"
#include "memr/evaluate.h"
#include "memr/gradsuite.h"
#include "memr/lm.h"
#include "memr/model.h"
#include "memr/ops.h"
#include "memr/train.h"

namespace py = pybind11;
using namespace memr;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const Array& a) {
  if (a.ndim() != 2) throw DimensionError("expected a 2-d array, got " + std::to_string(a.ndim()) + " dimensions");
  const int rows = static_cast<int>(a.shape(0)), cols = static_cast<int>(a.shape(1));
  return Tensor({rows, cols}, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const Tensor& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  Array out(shape);
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

// Python values go through the same key = value parser as config files.
RunConfig run_config(const py::dict& options) {
  ConfigMap entries;
  for (const auto& [key, value] : options) entries[py::str(key)] = py::str(value);
  RunConfig run;
  apply_config(entries, run);
  return run;
}

double value_or_nan(const Tensor& t) {
  return t.defined() ? t.item() : std::numeric_limits<double>::quiet_NaN();
}

DecodeConfig decode_config(double lambda, double gamma, int beam, int max_len) {
  DecodeConfig cfg;
  cfg.lambda = lambda;
  cfg.gamma = gamma;
  cfg.beam_width = beam;
  cfg.max_len = max_len;
  return cfg;
}

py::dict decode_to_dict(const DecodeResult& r) {
  py::list nbest;
  for (const Hypothesis& h : r.nbest) nbest.append(py::make_tuple(h.prefix, h.score));
  py::dict out;
  out["best"] = r.best;
  out["score"] = r.score;
  out["truncated"] = r.truncated;
  out["nbest"] = nbest;
  return out;
}

std::vector<Utterance> to_utterances(const py::list& items) {
  std::vector<Utterance> out;
  for (const auto& item : items) out.push_back(item.cast<Utterance>());
  return out;
}

}  // namespace

PYBIND11_MODULE(memr, m) {
  m.doc() = "Multi-encoder multi-resolution joint CTC/attention recognizer";

  auto base = py::register_exception<Error>(m, "MemrError", PyExc_RuntimeError);
  py::register_exception<DimensionError>(m, "DimensionError", base);
  py::register_exception<NumericError>(m, "NumericError", base);
  py::register_exception<ContractError>(m, "ContractError", base);
  py::register_exception<VocabularyError>(m, "VocabularyError", base);
  py::register_exception<ConfigError>(m, "ConfigError", base);
  py::register_exception<DataError>(m, "DataError", base);
  py::register_exception<SizeError>(m, "SizeError", base);
  auto ckpt = py::register_exception<CheckpointError>(m, "CheckpointError", base);
  py::register_exception<CheckpointFormatError>(m, "CheckpointFormatError", ckpt);
  py::register_exception<CheckpointVersionError>(m, "CheckpointVersionError", ckpt);
  py::register_exception<CheckpointTruncatedError>(m, "CheckpointTruncatedError", ckpt);
  py::register_exception<CheckpointShapeError>(m, "CheckpointShapeError", ckpt);

  m.def("log_softmax", [](const Array& x) { return to_array(log_softmax_rows(to_tensor(x))); },
        "Row-wise log-softmax.");
  m.def("ctc_log_likelihood",
        [](const Array& log_posteriors, const LabelSequence& labels) {
          return ctc_log_likelihood(to_tensor(log_posteriors), labels).log_likelihood.item();
        },
        py::arg("log_posteriors"), py::arg("labels"),
        "log P(labels | X) from [T x (K+1)] log posteriors, blank at column 0. -inf when infeasible.");
  m.def("ctc_brute_force",
        [](const Array& log_posteriors, const LabelSequence& labels) {
          return ctc_brute_force(to_tensor(log_posteriors), labels);
        },
        py::arg("log_posteriors"), py::arg("labels"));
  m.def("greedy_collapse", [](const LabelSequence& path) { return greedy_collapse(path); });

  m.def("edit_distance", [](const LabelSequence& a, const LabelSequence& b) { return edit_distance(a, b); });
  m.def("corpus_cer", &corpus_cer, py::arg("refs"), py::arg("hyps"));
  m.def("encode", [](const std::string& text, int letters) { return Vocabulary(letters).parse(text); },
        py::arg("text"), py::arg("letters") = 26, "\"a b c\" -> [1, 2, 3]");
  m.def("decode_letters", [](const LabelSequence& s, int letters) { return Vocabulary(letters).format(s); },
        py::arg("labels"), py::arg("letters") = 26);

  py::class_<Utterance>(m, "Utterance")
      .def(py::init([](std::string id, const Array& features, LabelSequence labels) {
             return Utterance{std::move(id), to_tensor(features), std::move(labels)};
           }),
           py::arg("id"), py::arg("features"), py::arg("labels"))
      .def_readonly("id", &Utterance::id)
      .def_readonly("labels", &Utterance::labels)
      .def_property_readonly("features", [](const Utterance& u) { return to_array(u.features); })
      .def("__repr__", [](const Utterance& u) {
        return "<Utterance " + u.id + " frames=" + std::to_string(u.features.rows()) +
               " letters=" + std::to_string(u.labels.size()) + ">";
      });

  m.def("synth_dataset",
        [](const py::dict& options) {
          RunConfig run = run_config(options);
          return synth_dataset(run.data);
        },
        py::arg("options") = py::dict(),
        "Synthetic corpus. Options use config keys: data_seed, split, vocab, input_dim, n_utts, noise_sigma, ...");
  m.def("save_dataset",
        [](const std::string& dir, int vocab, const py::list& utts) { save_dataset(dir, Dataset{vocab, to_utterances(utts)}); },
        py::arg("dir"), py::arg("vocab"), py::arg("utterances"));
  m.def("load_dataset",
        [](const std::string& dir) {
          Dataset d = load_dataset(dir);
          return py::make_tuple(d.vocab_size, d.utterances);
        },
        py::arg("dir"), "Returns (vocab_size, utterances).");

  py::class_<LanguageModel>(m, "LanguageModel")
      .def("sequence_log_prob", [](const LanguageModel& lm, const LabelSequence& s) {
        NoGradScope no_grad;
        return lm.sequence_log_prob(s).item();
      })
      .def("perplexity", [](const LanguageModel& lm, const std::vector<LabelSequence>& corpus) {
        return lm_perplexity(lm, corpus);
      })
      .def("save", [](const LanguageModel& lm, const std::string& path) { save_lm(lm, path); });
  m.def("load_lm", &load_lm, py::arg("path"));
  m.def("lm_train",
        [](const std::vector<LabelSequence>& corpus, const py::dict& options) {
          RunConfig run = run_config(options);
          run.lm.num_letters = run.train.model.num_letters;
          LmTrainResult r = lm_train(corpus, run.lm, run.lm_train);
          return py::make_tuple(std::move(r.model), r.perplexity, r.epoch_loss);
        },
        py::arg("corpus"), py::arg("options") = py::dict(),
        "Returns (model, perplexity, per-epoch loss). Options: vocab, lm_embed, lm_hidden, lm_epochs, ...");

  py::class_<Model>(m, "Model")
      .def(py::init([](const py::dict& options, std::uint64_t seed) {
             return Model::init(run_config(options).train.model, seed);
           }),
           py::arg("options") = py::dict(), py::arg("seed") = 1)
      .def_property_readonly("streams", [](const Model& model) { return to_string(model.config().streams); })
      .def_property_readonly("num_letters", [](const Model& model) { return model.config().num_letters; })
      .def("parameters",
           [](const Model& model) {
             py::dict out;
             for (const auto& [name, t] : model.named_parameters()) out[py::str(name)] = to_array(t);
             return out;
           })
      .def("loss",
           [](const Model& model, const Array& features, const LabelSequence& labels, double lambda) {
             NoGradScope no_grad;
             const LossBreakdown b = model.loss(to_tensor(features), labels, lambda);
             py::dict out;
             out["total"] = value_or_nan(b.total);
             out["ctc1"] = value_or_nan(b.ctc1.log_likelihood);
             out["ctc2"] = value_or_nan(b.ctc2.log_likelihood);
             out["ctc_joint"] = value_or_nan(b.ctc_joint.log_likelihood);
             out["att"] = value_or_nan(b.att);
             out["feasible"] = b.feasible;
             return out;
           },
           py::arg("features"), py::arg("labels"), py::arg("lam") = 0.3,
           "Multi-task loss and its log-likelihood parts; NaN marks a part that was not computed.")
      .def("decode",
           [](const Model& model, const Array& features, const LanguageModel* lm, double lambda, double gamma,
              int beam, int max_len) {
             return decode_to_dict(model.decode(to_tensor(features), lm, decode_config(lambda, gamma, beam, max_len)));
           },
           py::arg("features"), py::arg("lm") = nullptr, py::arg("lam") = 0.3, py::arg("gamma") = 0.0,
           py::arg("beam") = 5, py::arg("max_len") = 20)
      .def("save", [](const Model& model, const std::string& path) { save_model(model, path); });
  m.def("load_model", [](const std::string& path) { return load_model(path); }, py::arg("path"));

  m.def("train",
        [](const py::list& data, const py::dict& options) {
          const RunConfig run = run_config(options);
          const std::vector<Utterance> utts = to_utterances(data);
          TrainResult r = [&] {
            py::gil_scoped_release release;
            return train(run.train, utts);
          }();
          py::list history;
          for (const EpochMetrics& e : r.history) {
            py::dict d;
            d["epoch"] = e.epoch;
            d["mtl_loss"] = e.mtl_loss;
            d["ctc1"] = e.ctc1;
            d["ctc2"] = e.ctc2;
            d["att"] = e.att;
            d["skipped"] = e.skipped;
            history.append(d);
          }
          return py::make_tuple(std::move(r.model), history);
        },
        py::arg("data"), py::arg("options") = py::dict(),
        "Returns (model, per-epoch metrics). Options use config keys: epochs, lambda, seed, streams, ...");

  m.def("evaluate",
        [](const Model& model, const py::list& data, const LanguageModel* lm, double lambda, double gamma, int beam,
           int max_len) {
          const EvalResult r = evaluate(model, to_utterances(data), lm, decode_config(lambda, gamma, beam, max_len));
          py::list hyps;
          for (const auto& u : r.utterances) hyps.append(py::make_tuple(u.id, u.ref, u.hyp));
          py::dict out;
          out["cer"] = r.cer;
          out["errors"] = r.errors;
          out["ref_length"] = r.ref_length;
          out["utterances"] = hyps;
          return out;
        },
        py::arg("model"), py::arg("data"), py::arg("lm") = nullptr, py::arg("lam") = 0.3, py::arg("gamma") = 0.0,
        py::arg("beam") = 5, py::arg("max_len") = 20);

  m.def("gradient_suite",
        [](std::uint64_t seed) {
          py::list out;
          for (const GradCheckCase& c : run_gradient_suite(seed)) {
            out.append(py::make_tuple(c.name, c.error, c.tolerance, c.passed()));
          }
          return out;
        },
        py::arg("seed") = 1, "Finite-difference checks as (name, error, tolerance, passed).");
}
