// Copyright 2026 The toric-rl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "toric/kernels.hpp"
#include "toric/network.hpp"

namespace toric {
namespace {

std::vector<std::uint8_t> random_grids(int d, int batch, Rng& rng) {
  std::vector<std::uint8_t> g(static_cast<std::size_t>(d) * d * batch);
  for (auto& x : g) x = rng.bernoulli(0.3) ? 1 : 0;
  return g;
}

// Random weights and biases, so every term of the forward pass matters.
QNetwork randomised(Architecture arch, std::uint64_t seed) {
  Rng rng(seed);
  QNetwork net = QNetwork::initialized(std::move(arch), rng);
  for (std::size_t i = 1; i < net.parameters().size(); i += 2) {
    for (double& b : net.parameters()[i].values) b = rng.normal(0.0, 0.1);
  }
  return net;
}

Architecture small_arch(int d) {
  Architecture a;
  a.d = d;
  a.conv_filters = 6;
  a.dense_widths = {5, 4};
  return a;
}

TEST(Architecture, ParameterCounts) {
  EXPECT_EQ(param_count(Architecture::standard(CodeDistance(3))), 179'812u);
  EXPECT_EQ(param_count(Architecture::standard(CodeDistance(5))), 573'028u);
  EXPECT_EQ(param_count(Architecture::standard(CodeDistance(7))), 1'228'388u);
  EXPECT_EQ(QNetwork(Architecture::standard(CodeDistance(5))).param_count(), 573'028u);
}

TEST(Architecture, ShapesFollowTheLayerStack) {
  const auto shapes = Architecture::standard(CodeDistance(5)).parameter_shapes();
  ASSERT_EQ(shapes.size(), 12u);
  EXPECT_EQ(shapes[0], (std::vector<int>{9, 512}));
  EXPECT_EQ(shapes[2], (std::vector<int>{2 * 2 * 512, 256}));
  EXPECT_EQ(shapes[10], (std::vector<int>{32, 4}));
  EXPECT_EQ(shapes[11], (std::vector<int>{4}));
}

TEST(Architecture, RejectsImpossibleShapes) {
  Architecture a;
  a.d = 3;
  a.kernel = 5;
  EXPECT_THROW(QNetwork{a}, std::invalid_argument);
}

TEST(QNetwork, ZeroNetworkOutputsZero) {
  const QNetwork net(Architecture::standard(CodeDistance(3)));
  std::vector<std::uint8_t> grid(9, 1);
  EXPECT_EQ(net.forward(grid), (std::array<double, 4>{0, 0, 0, 0}));
}

TEST(QNetwork, InitialisationScales) {
  Rng rng(9);
  const QNetwork net = QNetwork::initialized(Architecture::standard(CodeDistance(5)), rng);
  const auto& w = net.parameters()[2].values;  // 2048 x 256
  double sum = 0, sq = 0;
  for (double x : w) {
    sum += x;
    sq += x * x;
  }
  const double n = static_cast<double>(w.size());
  EXPECT_NEAR(sum / n, 0.0, 1e-3);
  EXPECT_NEAR(std::sqrt(sq / n), std::sqrt(2.0 / 2048.0), 1e-3 * std::sqrt(2.0 / 2048.0) * 10);
  for (double b : net.parameters()[3].values) EXPECT_EQ(b, 0.0);
}

TEST(QNetwork, ForwardMatchesNestedLoopOracle) {
  for (int d : {3, 5, 7}) {
    const QNetwork net = randomised(Architecture::standard(CodeDistance(d)), 100 + d);
    Rng rng(d);
    for (int trial = 0; trial < 10; ++trial) {
      const auto grid = random_grids(d, 1, rng);
      const auto fast = net.forward(grid);
      const auto slow = oracle::naive_forward(net, grid);
      for (int a = 0; a < 4; ++a) EXPECT_NEAR(fast[a], slow[a], 1e-12 * (1.0 + std::abs(slow[a])));
    }
  }
}

TEST(QNetwork, BatchEqualsRowByRow) {
  const QNetwork net = randomised(Architecture::standard(CodeDistance(5)), 4);
  Rng rng(4);
  const int batch = 37;
  const auto grids = random_grids(5, batch, rng);
  std::vector<double> q(batch * 4);
  Workspace ws;
  net.forward_batch(grids, batch, q, ws);
  for (int b = 0; b < batch; ++b) {
    const auto single = net.forward(std::span(grids).subspan(b * 25, 25));
    for (int a = 0; a < 4; ++a) EXPECT_NEAR(q[b * 4 + a], single[a], 1e-12);
  }
}

TEST(QNetwork, RejectsWrongInputSize) {
  const QNetwork net(Architecture::standard(CodeDistance(3)));
  std::vector<std::uint8_t> grid(10, 0);
  std::vector<double> q(4);
  Workspace ws;
  EXPECT_THROW(net.forward_batch(grid, 1, q, ws), std::invalid_argument);
}

TEST(QNetwork, ScalarAndAvx2BackendsAgree) {
  if (!kernels::avx2_supported()) GTEST_SKIP();
  const QNetwork net = randomised(Architecture::standard(CodeDistance(5)), 8);
  Rng rng(8);
  const auto grids = random_grids(5, 16, rng);
  std::vector<double> q1(64), q2(64);
  Workspace ws;
  const auto original = kernels::active_backend();
  kernels::set_active_backend(kernels::Backend::Scalar);
  net.forward_batch(grids, 16, q1, ws);
  kernels::set_active_backend(kernels::Backend::Avx2);
  net.forward_batch(grids, 16, q2, ws);
  kernels::set_active_backend(original);
  for (int i = 0; i < 64; ++i) EXPECT_NEAR(q1[i], q2[i], 1e-12 * (1 + std::abs(q1[i])));
}

struct Batch {
  std::vector<std::uint8_t> cells;
  std::vector<TrainingRow> rows;
};

Batch random_batch(int d, int n, Rng& rng) {
  Batch b;
  b.cells = random_grids(d, n, rng);
  for (int i = 0; i < n; ++i) {
    b.rows.push_back({std::span<const std::uint8_t>(b.cells).subspan(static_cast<std::size_t>(i) * d * d, d * d),
                      static_cast<int>(rng.below(4)), rng.normal(-2.0, 1.0)});
  }
  return b;
}

double relative_error(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}); }

// Central differences on every parameter of a small network.
TEST(Gradients, MatchFiniteDifferencesOnEveryComponent) {
  for (int d : {3, 5}) {
    QNetwork net = randomised(small_arch(d), 50 + d);
    Rng rng(d);
    const Batch batch = random_batch(d, 6, rng);
    const ParameterSet g = gradients(net, batch.rows);
    const double loss = oracle::naive_loss(net, batch.rows);
    Workspace ws;
    ParameterSet scratch;
    EXPECT_NEAR(gradients(net, batch.rows, scratch, ws), loss, 1e-12 * (1 + loss));
    const double h = 1e-6;
    for (std::size_t t = 0; t < g.size(); ++t) {
      for (std::size_t i = 0; i < g[t].size(); ++i) {
        double& p = net.parameters()[t].values[i];
        const double saved = p;
        p = saved + h;
        const double up = oracle::naive_loss(net, batch.rows);
        p = saved - h;
        const double down = oracle::naive_loss(net, batch.rows);
        p = saved;
        const double numeric = (up - down) / (2 * h);
        EXPECT_LT(relative_error(g[t].values[i], numeric), 1e-4) << "tensor " << t << " index " << i;
      }
    }
  }
}

TEST(Gradients, OnlyTheSelectedActionContributes) {
  QNetwork net = randomised(small_arch(3), 3);
  std::vector<std::uint8_t> grid(9, 0);
  grid[4] = 1;
  grid[0] = 1;
  const double q_up = net.forward(grid)[0];
  // Target equal to the prediction: zero loss, zero gradient.
  const std::vector<TrainingRow> rows = {{grid, 0, q_up}};
  const ParameterSet g = gradients(net, rows);
  for (const auto& t : g) {
    for (double x : t.values) EXPECT_NEAR(x, 0.0, 1e-15);
  }
}

TEST(Adam, FirstStepMovesEachParameterByLearningRate) {
  QNetwork net(small_arch(3));
  AdamState opt = AdamState::for_architecture(net.architecture());
  ParameterSet g = zeros_like(net.architecture());
  g[0].values[0] = 3.0;
  g[0].values[1] = -0.5;
  adam_step(net, g, opt);
  // m_hat = g, v_hat = g^2  =>  step = lr * g / (|g| + eps).
  EXPECT_NEAR(net.parameters()[0].values[0], -1e-3 * 3.0 / (3.0 + 1e-7), 1e-18);
  EXPECT_NEAR(net.parameters()[0].values[1], 1e-3 * 0.5 / (0.5 + 1e-7), 1e-18);
  EXPECT_EQ(net.parameters()[0].values[2], 0.0);
  EXPECT_EQ(opt.step, 1u);
}

TEST(Adam, MatchesClosedFormOverSeveralSteps) {
  QNetwork net(small_arch(3));
  AdamState opt = AdamState::for_architecture(net.architecture());
  opt.decay = 0.01;
  const std::vector<double> grads = {1.0, -2.0, 0.5, 4.0};
  double p = 0.0, m = 0.0, v = 0.0;
  for (std::size_t t = 1; t <= grads.size(); ++t) {
    ParameterSet g = zeros_like(net.architecture());
    g[2].values[5] = grads[t - 1];
    adam_step(net, g, opt);
    m = 0.9 * m + 0.1 * grads[t - 1];
    v = 0.999 * v + 0.001 * grads[t - 1] * grads[t - 1];
    const double lr = 1e-3 / (1.0 + 0.01 * static_cast<double>(t - 1));
    p -= lr * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-7);
  }
  EXPECT_NEAR(net.parameters()[2].values[5], p, 1e-15);
}

TEST(Adam, RejectsMismatchedGradients) {
  QNetwork net(small_arch(3));
  AdamState opt = AdamState::for_architecture(net.architecture());
  EXPECT_THROW(adam_step(net, zeros_like(small_arch(5)), opt), std::invalid_argument);
}

}  // namespace
}  // namespace toric
