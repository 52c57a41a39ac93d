// src/gradsuite.cc
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

#include "memr/gradsuite.h"

#include <array>
#include <functional>
#include <iomanip>
#include <ostream>

#include "memr/attention.h"
#include "memr/ctc.h"
#include "memr/encoders.h"
#include "memr/gradcheck.h"
#include "memr/lm.h"
#include "memr/model.h"
#include "memr/ops.h"

namespace memr {

namespace {

constexpr double kOpTolerance = 1e-4;
constexpr double kModelTolerance = 1e-3;
// Many full-model coordinates have gradients near 1e-7, where a 1e-5 stencil
// is dominated by round-off in the loss value.
constexpr double kModelStep = 1e-4;

// Values bounded away from zero so kinks (relu) and poles (log) stay clear of
// the difference stencil.
Tensor away_from_zero(Shape shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.mutable_data()) {
    const double mag = rng.uniform(0.2, 1.5);
    v = rng.uniform(0.0, 1.0) < 0.5 ? -mag : mag;
  }
  return t;
}

// Reduces a tensor to a scalar with fixed random weights so every output
// coordinate reaches the loss with a different sensitivity.
std::function<Tensor(const Tensor&)> weighted_sum(const Tensor& out_like, Rng& rng) {
  Tensor w = uniform(out_like.shape(), 0.5, 1.5, rng);
  return [w](const Tensor& y) { return sum(mul(y, w)); };
}

class Suite {
 public:
  explicit Suite(std::uint64_t seed) : rng_(seed) {}

  // Unary map f(x) with a weighted-sum readout.
  void unary(const std::string& name, const std::function<Tensor(const Tensor&)>& f, const Tensor& x) {
    Tensor probe;
    {
      NoGradScope no_grad;
      probe = f(x);
    }
    auto readout = weighted_sum(probe, rng_);
    check(name, [&](const Tensor& v) { return readout(f(v)); }, x, kOpTolerance);
  }

  void check(const std::string& name, const std::function<Tensor(const Tensor&)>& f, const Tensor& x,
             double tolerance, double h = 1e-5) {
    cases_.push_back({name, finite_diff_check(f, x, h), tolerance});
  }

  void check_params(const std::string& name, const std::function<Tensor()>& f, const std::vector<Tensor>& params,
                    double tolerance, double h = 1e-5) {
    cases_.push_back({name, finite_diff_check_params(f, params, h), tolerance});
  }

  Rng& rng() { return rng_; }
  std::vector<GradCheckCase> take() { return std::move(cases_); }

 private:
  Rng rng_;
  std::vector<GradCheckCase> cases_;
};

void tensor_ops(Suite& s) {
  Rng& rng = s.rng();
  const Tensor b = randn({4, 3}, rng);
  s.unary("matmul (left)", [&](const Tensor& a) { return matmul(a, b); }, randn({2, 4}, rng));
  const Tensor a = randn({2, 4}, rng);
  s.unary("matmul (right)", [&](const Tensor& x) { return matmul(a, x); }, randn({4, 3}, rng));
  s.unary("transpose", [](const Tensor& x) { return transpose(x); }, randn({3, 5}, rng));
  const Tensor other = randn({3, 4}, rng);
  s.unary("add", [&](const Tensor& x) { return add(x, other); }, randn({3, 4}, rng));
  s.unary("sub", [&](const Tensor& x) { return sub(other, x); }, randn({3, 4}, rng));
  s.unary("mul", [&](const Tensor& x) { return mul(x, x * other); }, randn({3, 4}, rng));
  s.unary("scale", [](const Tensor& x) { return scale(x, -2.5); }, randn({2, 3}, rng));
  const Tensor m = randn({4, 3}, rng);
  s.unary("add_row_broadcast", [&](const Tensor& bias) { return add_row_broadcast(m, bias); }, randn({1, 3}, rng));
  s.unary("sigmoid", [](const Tensor& x) { return sigmoid(x); }, randn({3, 4}, rng));
  s.unary("tanh", [](const Tensor& x) { return tanh(x); }, randn({3, 4}, rng));
  s.unary("relu", [](const Tensor& x) { return relu(x); }, away_from_zero({3, 4}, rng));
  s.unary("exp", [](const Tensor& x) { return exp(x); }, randn({3, 4}, rng));
  s.unary("log", [](const Tensor& x) { return log(x); }, uniform({3, 4}, 0.5, 2.0, rng));
  s.unary("softmax_rows", [](const Tensor& x) { return softmax_rows(x); }, randn({3, 5}, rng));
  s.unary("log_softmax_rows", [](const Tensor& x) { return log_softmax_rows(x); }, randn({3, 5}, rng));
  s.check("sum", [](const Tensor& x) { return sum(x); }, randn({3, 4}, rng), kOpTolerance);
  s.check("logsumexp_all", [](const Tensor& x) { return logsumexp_all(x); }, randn({3, 4}, rng), kOpTolerance);
  const Tensor lae = randn({2, 3}, rng);
  s.unary("log_add_exp", [&](const Tensor& x) { return log_add_exp(x, lae); }, randn({2, 3}, rng));
  s.unary("reshape", [](const Tensor& x) { return reshape(x, {3, 4}); }, randn({2, 6}, rng));
  const Tensor right = randn({3, 2}, rng);
  s.unary("concat_cols", [&](const Tensor& x) { return concat_cols(std::array<Tensor, 3>{x, right, x}); },
          randn({3, 4}, rng));
  const Tensor below = randn({2, 4}, rng);
  s.unary("concat_rows", [&](const Tensor& x) { return concat_rows(std::array<Tensor, 2>{below, x}); },
          randn({3, 4}, rng));
  s.unary("slice_cols", [](const Tensor& x) { return slice_cols(x, 1, 4); }, randn({3, 5}, rng));
  s.unary("slice_rows", [](const Tensor& x) { return slice_rows(x, 1, 3); }, randn({4, 3}, rng));
  const std::vector<int> index = {5, 0, -1, 5, 2, 3};
  s.unary("gather", [&](const Tensor& x) { return gather(x, index, {2, 3}, -3.0); }, randn({2, 3}, rng));
  const Tensor cw = randn({3, 2, 3, 3}, rng, 0.5);
  const Tensor cb = randn({1, 3}, rng);
  s.unary("conv2d_3x3 (input)", [&](const Tensor& x) { return conv2d_3x3(x, cw, cb); }, randn({2, 5, 4}, rng));
  const Tensor cin = randn({2, 5, 4}, rng);
  s.unary("conv2d_3x3 (weight)", [&](const Tensor& w) { return conv2d_3x3(cin, w, cb); }, randn({3, 2, 3, 3}, rng));
  s.unary("conv2d_3x3 (bias)", [&](const Tensor& bias) { return conv2d_3x3(cin, cw, bias); }, randn({1, 3}, rng));
  s.unary("max_pool_2x2", [](const Tensor& x) { return max_pool_2x2(x); }, randn({2, 5, 3}, rng));
  s.check(
      "softmax + log-loss",
      [](const Tensor& x) { return scale(sum(slice_cols(log_softmax_rows(x), 2, 3)), -1.0); },
      randn({3, 5}, rng), kOpTolerance);
  const Tensor w1 = randn({4, 5}, rng, 0.5), w2 = randn({5, 5}, rng, 0.5), w3 = randn({5, 1}, rng, 0.5);
  s.check(
      "3-layer composite",
      [&](const Tensor& x) { return sum(matmul(sigmoid(matmul(tanh(matmul(x, w1)), w2)), w3)); },
      randn({2, 4}, rng), kOpTolerance);
}

void module_ops(Suite& s) {
  Rng& rng = s.rng();
  const RecurrentCell cell = RecurrentCell::init(3, 4, rng);
  const LstmState prev{randn({1, 4}, rng, 0.5), randn({1, 4}, rng, 0.5)};
  s.unary("lstm_cell_step (input)", [&](const Tensor& x) { return lstm_cell_step(cell, x, prev).h; },
          randn({1, 3}, rng));
  const Tensor x_t = randn({1, 3}, rng);
  s.unary("lstm_cell_step (cell state)",
          [&](const Tensor& c) {
            const LstmState next = lstm_cell_step(cell, x_t, LstmState{prev.h, c});
            return concat_cols(std::array<Tensor, 2>{next.h, next.c});
          },
          randn({1, 4}, rng));
  s.check_params("lstm_cell_step (weights)", [&] { return sum(lstm_cell_step(cell, x_t, prev).h); },
                 {cell.w_input, cell.w_hidden, cell.bias}, kOpTolerance);

  const std::vector<int> labels = {1, 2, 2};
  s.check("ctc_log_likelihood",
          [&](const Tensor& logits) { return ctc_log_likelihood(log_softmax_rows(logits), labels).log_likelihood; },
          randn({7, 3}, rng), kOpTolerance);
  s.check("ctc_log_likelihood (raw log-posteriors)",
          [&](const Tensor& lp) { return ctc_log_likelihood(lp, labels).log_likelihood; },
          uniform({7, 3}, -3.0, -0.1, rng), kOpTolerance);

  const AttentionParams att = AttentionParams::init(4, 3, 5, rng);
  const Tensor h = randn({5, 3}, rng);
  s.unary("content_attention (query)",
          [&](const Tensor& q) {
            const AttentionResult r = content_attention(q, h, att);
            return concat_cols(std::array<Tensor, 2>{r.weights, r.context});
          },
          randn({1, 4}, rng));
  const Tensor q = randn({1, 4}, rng);
  s.unary("content_attention (frames)", [&](const Tensor& frames) { return content_attention(q, frames, att).context; },
          randn({5, 3}, rng));
  const Tensor r2 = randn({1, 3}, rng);
  s.unary("han_fuse", [&](const Tensor& r1) { return han_fuse(q, r1, r2, att).fused; }, randn({1, 3}, rng));

  const DecoderConfig dcfg{3, 3, 4, 4, 3};
  const DecoderParams dec = DecoderParams::init(dcfg, rng);
  const DecoderState state{LstmState{randn({1, 4}, rng, 0.5), randn({1, 4}, rng, 0.5)}, 1};
  s.unary("decoder_step", [&](const Tensor& ctx) { return decoder_step(state, 2, ctx, dec).log_probs; },
          randn({1, 3}, rng));

  EncoderConfig ecfg;
  ecfg.input_dim = 5;
  ecfg.hidden = 3;
  ecfg.blstm_layers = 2;
  ecfg.vgg_channels1 = 2;
  ecfg.vgg_channels2 = 3;
  ecfg.vgg_recurrent_layers = 1;
  const BlstmParams blstm = BlstmParams::init(ecfg.input_dim, ecfg.hidden, ecfg.blstm_layers, rng);
  s.unary("blstm_forward", [&](const Tensor& x) { return blstm_forward(x, blstm); }, randn({6, 5}, rng));
  const VggBlstmParams vgg = VggBlstmParams::init(ecfg, rng);
  s.unary("vggblstm_forward", [&](const Tensor& x) { return vggblstm_forward(x, vgg); }, randn({6, 5}, rng));

  Rng lm_rng(rng.uniform_int(0, 1 << 30));
  const LanguageModel lm = LanguageModel::init(LmConfig{3, 3, 4}, lm_rng);
  std::vector<Tensor> lm_params;
  for (const auto& [name, t] : lm.named_parameters()) lm_params.push_back(t);
  const std::vector<int> seq = {2, 1, 3};
  s.check_params("lm sequence_log_prob", [&] { return lm.sequence_log_prob(seq); }, lm_params, kOpTolerance,
                 kModelStep);
}

void full_model(Suite& s) {
  Rng& rng = s.rng();
  ModelConfig cfg;
  cfg.num_letters = 3;
  cfg.encoder.input_dim = 4;
  cfg.encoder.hidden = 3;
  cfg.encoder.blstm_layers = 1;
  cfg.encoder.vgg_channels1 = 2;
  cfg.encoder.vgg_channels2 = 2;
  cfg.encoder.vgg_recurrent_layers = 1;
  cfg.attention_dim = 3;
  cfg.decoder_hidden = 3;
  cfg.embed = 2;
  const Model model = Model::init(cfg, static_cast<std::uint64_t>(rng.uniform_int(0, 1 << 30)));
  // Zero-initialized conv biases can leave a dead channel feeding exact zeros
  // into the next ReLU, i.e. onto its kink. Check at a generic point instead.
  for (Tensor p : model.parameters()) {
    for (double& v : p.mutable_data()) v += rng.normal(0.0, 0.1);
  }
  const Tensor features = randn({8, 4}, rng);
  const std::vector<int> labels = {1, 3};
  s.check_params("full MTL loss (T=8, L=2, all parameters)",
                 [&] { return model.loss(features, labels, 0.3).total; }, model.parameters(), kModelTolerance,
                 kModelStep);
  s.check("full MTL loss (T=8, L=2, features)", [&](const Tensor& x) { return model.loss(x, labels, 0.3).total; },
          features, kModelTolerance, kModelStep);
}

}  // namespace

std::vector<GradCheckCase> run_gradient_suite(std::uint64_t seed) {
  Suite suite(seed);
  tensor_ops(suite);
  module_ops(suite);
  full_model(suite);
  return suite.take();
}

void print_gradient_report(std::ostream& os, const std::vector<GradCheckCase>& cases) {
  const auto flags = os.flags();
  for (const auto& c : cases) {
    os << (c.passed() ? "ok   " : "FAIL ") << std::left << std::setw(44) << c.name << std::scientific
       << std::setprecision(3) << c.error << " (tol " << c.tolerance << ")\n";
  }
  os.flags(flags);
}

}  // namespace memr
