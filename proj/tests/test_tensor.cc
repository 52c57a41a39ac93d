// tests/test_tensor.cc
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

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <limits>

#include "memr/errors.h"
#include "memr/gradcheck.h"
#include "memr/ops.h"
#include "memr/tensor.h"

namespace memr {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void expect_matrix_eq(const Tensor& t, const Tensor& want, double tol = 0.0) {
  ASSERT_EQ(t.shape(), want.shape());
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_NEAR(t[i], want[i], tol) << "at " << i;
}

TEST(Tensor, ShapeAndDataAgree) {
  Tensor t({2, 3}, 1.5);
  EXPECT_EQ(t.size(), 6u);
  EXPECT_EQ(t.rows(), 2);
  EXPECT_EQ(t.cols(), 3);
  EXPECT_THROW(Tensor({2, 2}, std::vector<double>{1, 2, 3}), DimensionError);
  EXPECT_EQ(Tensor::scalar(4.0).rank(), 0);
  EXPECT_DOUBLE_EQ(Tensor::scalar(4.0).item(), 4.0);
}

TEST(Tensor, CloneIsDeep) {
  Tensor a = Tensor::row({1, 2});
  Tensor b = a;
  Tensor c = a.clone();
  a.mutable_data()[0] = 9;
  EXPECT_EQ(b[0], 9);
  EXPECT_EQ(c[0], 1);
}

TEST(Matmul, IdentityLeavesOperand) {
  Rng rng(3);
  const Tensor b = randn({2, 5}, rng);
  expect_matrix_eq(matmul(Tensor::identity(2), b), b);
}

TEST(Matmul, ZerosAnnihilate) {
  Rng rng(4);
  expect_matrix_eq(matmul(Tensor({2, 3}), randn({3, 4}, rng)), Tensor({2, 4}));
}

TEST(Matmul, HandArithmetic) {
  expect_matrix_eq(matmul(Tensor::matrix({{1, 2}, {3, 4}}), Tensor::matrix({{1}, {1}})), Tensor::matrix({{3}, {7}}));
}

TEST(Matmul, ShapeMismatchNamesBothShapes) {
  try {
    matmul(Tensor({2, 3}), Tensor({4, 2}));
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("[2 x 3]"), std::string::npos) << msg;
    EXPECT_NE(msg.find("[4 x 2]"), std::string::npos) << msg;
  }
}

TEST(Softmax, UniformRow) {
  const Tensor s = softmax_rows(Tensor::row({0, 0, 0}));
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(s[i], 1.0 / 3.0, 1e-15);
}

TEST(Softmax, LargeLogitIsStable) {
  const Tensor s = softmax_rows(Tensor::row({1000, 0}));
  EXPECT_NEAR(s[0], 1.0, 1e-12);
  EXPECT_NEAR(s[1], 0.0, 1e-12);
}

TEST(Softmax, MatchesHighPrecisionOracle) {
  // exp(i) / sum exp(j), i in {1,2,3}, evaluated at 40 significant digits.
  const double want[] = {0.0900305731703804579980221, 0.2447284710547976524729596, 0.6652409557748218895290183};
  const Tensor s = softmax_rows(Tensor::row({1, 2, 3}));
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(s[i], want[i], 1e-15);
}

TEST(Softmax, RejectsNaN) {
  EXPECT_THROW(softmax_rows(Tensor::row({0, std::nan("")})), NumericError);
  EXPECT_THROW(log_softmax_rows(Tensor::row({std::nan(""), 1})), NumericError);
}

TEST(Softmax, RowsSumToOneOnRandomInputs) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int rows = rng.uniform_int(1, 4), cols = rng.uniform_int(1, 9);
    const Tensor s = softmax_rows(randn({rows, cols}, rng, rng.uniform(0.1, 50.0)));
    for (int r = 0; r < rows; ++r) {
      double total = 0;
      for (int c = 0; c < cols; ++c) {
        EXPECT_GE(s.at(r, c), 0.0);
        total += s.at(r, c);
      }
      EXPECT_NEAR(total, 1.0, 1e-12);
    }
  }
}

TEST(LogSumExp, Examples) {
  const std::array<double, 2> halves = {std::log(0.5), std::log(0.5)};
  EXPECT_NEAR(log_sum_exp(halves), 0.0, 1e-15);
  const std::array<double, 2> absorbing = {-kInf, -2.75};
  EXPECT_EQ(log_sum_exp(absorbing), -2.75);
  // log(e^-1000 + e^-1001) at 40 digits.
  const std::array<double, 2> tiny = {-1000, -1001};
  EXPECT_NEAR(log_sum_exp(tiny), -999.686738312481777165951, 1e-12);
  const std::array<double, 3> none = {-kInf, -kInf, -kInf};
  EXPECT_EQ(log_sum_exp(none), -kInf);
  EXPECT_EQ(log_sum_exp(std::span<const double>()), -kInf);
  EXPECT_EQ(log_add_exp(-kInf, -kInf), -kInf);
}

TEST(LogSumExp, TensorVersionAgrees) {
  EXPECT_NEAR(logsumexp_all(Tensor::row({-1000, -1001})).item(), -999.686738312481777165951, 1e-12);
  EXPECT_EQ(logsumexp_all(Tensor::row({-kInf, -kInf})).item(), -kInf);
}

TEST(Backward, SumGivesOnes) {
  Tensor x = Tensor::row({1, -2, 3});
  x.set_requires_grad(true);
  Tape tape;
  Tensor loss;
  {
    TapeScope scope(tape);
    loss = sum(x);
  }
  tape.backward(loss);
  for (double g : x.grad()) EXPECT_EQ(g, 1.0);
  EXPECT_EQ(loss.grad()[0], 1.0);
}

TEST(Backward, SquareGivesTwoX) {
  Tensor x = Tensor::scalar(1.75);
  x.set_requires_grad(true);
  Tape tape;
  Tensor loss;
  {
    TapeScope scope(tape);
    loss = mul(x, x);
  }
  tape.backward(loss);
  EXPECT_DOUBLE_EQ(x.grad()[0], 3.5);
}

TEST(Backward, ReusedTensorAccumulates) {
  Tensor x = Tensor::scalar(2.0);
  x.set_requires_grad(true);
  Tape tape;
  Tensor loss;
  {
    TapeScope scope(tape);
    loss = add(add(x, x), scale(x, 3.0));
  }
  tape.backward(loss);
  EXPECT_DOUBLE_EQ(x.grad()[0], 5.0);
}

TEST(Backward, SecondCallIsAnError) {
  Tensor x = Tensor::row({1, 2});
  x.set_requires_grad(true);
  Tape tape;
  Tensor loss;
  {
    TapeScope scope(tape);
    loss = sum(x);
  }
  tape.backward(loss);
  EXPECT_THROW(tape.backward(loss), ContractError);
}

TEST(Backward, NonScalarLossIsAnError) {
  Tensor x = Tensor::row({1, 2});
  x.set_requires_grad(true);
  Tape tape;
  Tensor y;
  {
    TapeScope scope(tape);
    y = scale(x, 2.0);
  }
  EXPECT_THROW(tape.backward(y), ContractError);
}

TEST(Backward, NoGradScopeRecordsNothing) {
  Tensor x = Tensor::row({1, 2});
  x.set_requires_grad(true);
  Tape tape;
  {
    TapeScope scope(tape);
    NoGradScope off;
    sum(mul(x, x));
  }
  EXPECT_EQ(tape.size(), 0u);
}

TEST(Backward, RandomThreeLayerComposite) {
  Rng rng(21);
  const Tensor w1 = randn({5, 6}, rng), w2 = randn({6, 4}, rng), w3 = randn({4, 1}, rng);
  const double err = finite_diff_check(
      [&](const Tensor& x) { return sum(matmul(tanh(matmul(sigmoid(matmul(x, w1)), w2)), w3)); }, randn({3, 5}, rng),
      1e-5);
  EXPECT_LE(err, 1e-4);
}

TEST(FiniteDiff, LinearIsExact) {
  Rng rng(8);
  const Tensor w = randn({4, 1}, rng);
  EXPECT_LE(finite_diff_check([&](const Tensor& x) { return sum(matmul(x, w)); }, randn({2, 4}, rng)), 1e-9);
}

TEST(FiniteDiff, SoftmaxLogLoss) {
  Rng rng(9);
  const double err = finite_diff_check(
      [](const Tensor& x) { return scale(sum(slice_cols(log_softmax_rows(x), 1, 2)), -1.0); }, randn({4, 6}, rng));
  EXPECT_LE(err, 1e-4);
}

// Each differentiable op on seeded random shapes.
class OpGradients : public ::testing::TestWithParam<int> {};

TEST_P(OpGradients, PassCentralDifferences) {
  Rng rng(static_cast<std::uint64_t>(GetParam()));
  const int m = rng.uniform_int(1, 4), k = rng.uniform_int(1, 5), n = rng.uniform_int(1, 4);
  const Tensor w = uniform({m, n}, 0.5, 1.5, rng);
  const Tensor right = randn({k, n}, rng);
  const Tensor other = randn({m, k}, rng);
  const Tensor bias = randn({1, k}, rng);
  auto readout = [&](const Tensor& y) { return sum(mul(y, w)); };
  auto wide = uniform({m, k}, 0.5, 1.5, rng);
  auto readout_k = [&](const Tensor& y) { return sum(mul(y, wide)); };
  const Tensor x = randn({m, k}, rng);

  EXPECT_LE(finite_diff_check([&](const Tensor& a) { return readout(matmul(a, right)); }, x), 1e-4);
  EXPECT_LE(finite_diff_check([&](const Tensor& a) { return readout_k(add(a, other)); }, x), 1e-4);
  EXPECT_LE(finite_diff_check([&](const Tensor& a) { return readout_k(sub(other, a)); }, x), 1e-4);
  EXPECT_LE(finite_diff_check([&](const Tensor& a) { return readout_k(mul(a, mul(a, other))); }, x), 1e-4);
  EXPECT_LE(finite_diff_check([&](const Tensor& a) { return readout_k(add_row_broadcast(other, a)); }, bias), 1e-4);
  EXPECT_LE(finite_diff_check([&](const Tensor& a) { return readout_k(sigmoid(a)); }, x), 1e-4);
  EXPECT_LE(finite_diff_check([&](const Tensor& a) { return readout_k(tanh(a)); }, x), 1e-4);
  EXPECT_LE(finite_diff_check([&](const Tensor& a) { return readout_k(exp(a)); }, x), 1e-4);
  EXPECT_LE(finite_diff_check([&](const Tensor& a) { return readout_k(log(exp(a))); }, x), 1e-4);
  EXPECT_LE(finite_diff_check([&](const Tensor& a) { return readout_k(softmax_rows(a)); }, x), 1e-4);
  EXPECT_LE(finite_diff_check([&](const Tensor& a) { return readout_k(log_softmax_rows(a)); }, x), 1e-4);
  EXPECT_LE(finite_diff_check([&](const Tensor& a) { return readout_k(log_add_exp(a, other)); }, x), 1e-4);
  EXPECT_LE(finite_diff_check([&](const Tensor& a) { return logsumexp_all(a); }, x), 1e-4);
  EXPECT_LE(finite_diff_check([&](const Tensor& a) { return readout_k(transpose(transpose(a))); }, x), 1e-4);
  EXPECT_LE(finite_diff_check(
                [&](const Tensor& a) { return readout(slice_cols(concat_cols(std::array<Tensor, 2>{a, w}), k, k + n)); },
                x),
            1e-4);
  EXPECT_LE(finite_diff_check(
                [&](const Tensor& a) { return readout_k(slice_rows(concat_rows(std::array<Tensor, 2>{a, a}), m, 2 * m)); },
                x),
            1e-4);
}

INSTANTIATE_TEST_SUITE_P(Seeds, OpGradients, ::testing::Range(1, 9));

TEST(Conv, ZeroInputZeroBiasGivesZeroActivations) {
  Rng rng(2);
  const Tensor out = relu(conv2d_3x3(Tensor({1, 6, 5}), randn({4, 1, 3, 3}, rng), Tensor({1, 4})));
  for (double v : out.data()) EXPECT_EQ(v, 0.0);
}

TEST(Conv, MatchesDirectLoop) {
  Rng rng(5);
  const Tensor in = randn({2, 4, 3}, rng), w = randn({3, 2, 3, 3}, rng), b = randn({1, 3}, rng);
  const Tensor out = conv2d_3x3(in, w, b);
  ASSERT_EQ(out.shape(), (Shape{3, 4, 3}));
  for (int co = 0; co < 3; ++co) {
    for (int y = 0; y < 4; ++y) {
      for (int x = 0; x < 3; ++x) {
        double want = b[co];
        for (int ci = 0; ci < 2; ++ci) {
          for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
              if (y + dy < 0 || y + dy >= 4 || x + dx < 0 || x + dx >= 3) continue;
              want += in[(ci * 4 + y + dy) * 3 + x + dx] * w[((co * 2 + ci) * 3 + dy + 1) * 3 + dx + 1];
            }
          }
        }
        EXPECT_NEAR(out[(co * 4 + y) * 3 + x], want, 1e-12);
      }
    }
  }
}

TEST(Pool, CeilWindows) {
  const Tensor in({1, 3, 3}, std::vector<double>{1, 5, 2, 3, 4, 9, 7, 0, 6});
  const Tensor out = max_pool_2x2(in);
  ASSERT_EQ(out.shape(), (Shape{1, 2, 2}));
  EXPECT_EQ(out[0], 5);
  EXPECT_EQ(out[1], 9);
  EXPECT_EQ(out[2], 7);
  EXPECT_EQ(out[3], 6);
}

TEST(Gather, FillsNegativeIndices) {
  const Tensor out = gather(Tensor::row({4, 5, 6}), std::vector<int>{2, -1, 0}, {1, 3}, -kInf);
  EXPECT_EQ(out[0], 6);
  EXPECT_EQ(out[1], -kInf);
  EXPECT_EQ(out[2], 4);
}

TEST(Rng, SameSeedSameTensors) {
  Rng a(1234), b(1234);
  const Tensor x = randn({3, 7}, a), y = randn({3, 7}, b);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(x[i], y[i]);
  Rng c(1235);
  EXPECT_NE(randn({1, 1}, c)[0], x[0]);
}

}  // namespace
}  // namespace memr
