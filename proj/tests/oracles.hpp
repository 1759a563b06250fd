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

#pragma once

// Slow, obviously-correct reference implementations used only by tests.

#include <algorithm>
#include <array>
#include <climits>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "toric/lattice.hpp"
#include "toric/matching.hpp"
#include "toric/network.hpp"
#include "toric/rng.hpp"

namespace toric::oracle {

// Exhaustive perfect matching: the lowest free node is paired with each free
// partner in ascending order, so the first strict minimum found is also the
// lexicographically smallest optimal pair list.
inline Matching brute_force_matching(const DistanceMatrix& dist) {
  const int n = dist.size();
  Matching best;
  best.weight = LLONG_MAX;
  std::vector<std::pair<int, int>> current;
  std::vector<bool> used(n, false);
  auto recurse = [&](auto&& self, long long weight) -> void {
    int first = 0;
    while (first < n && used[first]) ++first;
    if (first == n) {
      if (weight < best.weight) best = {current, weight};
      return;
    }
    used[first] = true;
    for (int j = first + 1; j < n; ++j) {
      if (used[j]) continue;
      used[j] = true;
      current.emplace_back(first, j);
      self(self, weight + dist.at(first, j));
      current.pop_back();
      used[j] = false;
    }
    used[first] = false;
  };
  recurse(recurse, 0);
  if (n == 0) best.weight = 0;
  return best;
}

// Plain torus distance from first principles: minimum over the wrap choices.
inline int torus_manhattan(Coord a, Coord b, int d) {
  int best = INT_MAX;
  for (int wr = -1; wr <= 1; ++wr) {
    for (int wc = -1; wc <= 1; ++wc) {
      best = std::min(best, std::abs(a.row - b.row + wr * d) + std::abs(a.col - b.col + wc * d));
    }
  }
  return best;
}

// The four edges bounding plaquette (r, c), listed explicitly.
inline std::array<std::pair<bool, Coord>, 4> boundary(int r, int c, int d) {
  // (is_top, coordinate of the owning plaquette)
  return {{{true, {r, c}}, {true, {(r + 1) % d, c}}, {false, {r, c}}, {false, {r, (c + 1) % d}}}};
}

inline std::vector<Coord> defects_of(const HiddenState& s) {
  const int d = s.distance();
  std::vector<Coord> out;
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) {
      int parity = 0;
      for (auto [is_top, e] : boundary(r, c, d)) parity ^= is_top ? s.top(e.row, e.col) : s.left(e.row, e.col);
      if (parity) out.push_back({r, c});
    }
  }
  return out;
}

// Winding parity measured across the horizontal cut just above row `row`
// (vertical loops) and the vertical cut left of column `col` (horizontal loops).
inline bool vertical_parity_at(const HiddenState& s, int row) {
  bool x = false;
  for (int c = 0; c < s.distance(); ++c) x ^= s.top(row, c);
  return x;
}

inline bool horizontal_parity_at(const HiddenState& s, int col) {
  bool x = false;
  for (int r = 0; r < s.distance(); ++r) x ^= s.left(r, col);
  return x;
}

// Random syndrome-free configuration: random vertex stars (trivial loops)
// plus random non-contractible loops in both directions.
inline HiddenState random_closed_configuration(int d, Rng& rng) {
  HiddenState s{CodeDistance(d)};
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) {
      if (!rng.bernoulli(0.5)) continue;
      // Star of the vertex at the top-left corner of plaquette (r, c).
      s.flip_top(r, c);
      s.flip_top(r, (c + d - 1) % d);
      s.flip_left(r, c);
      s.flip_left((r + d - 1) % d, c);
    }
  }
  for (int c = 0; c < d; ++c) {
    if (rng.bernoulli(0.3)) {
      for (int r = 0; r < d; ++r) s.flip_top(r, c);
    }
  }
  for (int r = 0; r < d; ++r) {
    if (rng.bernoulli(0.3)) {
      for (int c = 0; c < d; ++c) s.flip_left(r, c);
    }
  }
  return s;
}

// Forward pass written as nested loops straight from the layer definitions:
// valid convolution (channels-last output) + ReLU, then dense layers with
// weights stored [in][out], ReLU everywhere except the output.
inline std::array<double, 4> naive_forward(const QNetwork& net, std::span<const std::uint8_t> grid) {
  const Architecture& a = net.architecture();
  const ParameterSet& p = net.parameters();
  const int side = (a.d - a.kernel) / a.stride + 1;
  std::vector<double> x(static_cast<std::size_t>(side) * side * a.conv_filters);
  for (int oy = 0; oy < side; ++oy) {
    for (int ox = 0; ox < side; ++ox) {
      for (int f = 0; f < a.conv_filters; ++f) {
        double acc = p[1].values[f];
        for (int ky = 0; ky < a.kernel; ++ky) {
          for (int kx = 0; kx < a.kernel; ++kx) {
            const double in = grid[(oy * a.stride + ky) * a.d + ox * a.stride + kx];
            acc += in * p[0].values[(ky * a.kernel + kx) * a.conv_filters + f];
          }
        }
        x[(oy * side + ox) * a.conv_filters + f] = std::max(acc, 0.0);
      }
    }
  }
  const int layers = a.num_dense_layers();
  for (int l = 0; l < layers; ++l) {
    const Tensor& w = p[2 + 2 * l];
    const Tensor& b = p[3 + 2 * l];
    const int in = w.shape[0];
    const int out = w.shape[1];
    std::vector<double> y(out);
    for (int j = 0; j < out; ++j) {
      double acc = b.values[j];
      for (int i = 0; i < in; ++i) acc += x[i] * w.values[static_cast<std::size_t>(i) * out + j];
      y[j] = (l + 1 < layers) ? std::max(acc, 0.0) : acc;
    }
    x = std::move(y);
  }
  return {x[0], x[1], x[2], x[3]};
}

inline double naive_loss(const QNetwork& net, std::span<const TrainingRow> batch) {
  double loss = 0.0;
  for (const auto& row : batch) {
    const double e = naive_forward(net, row.input)[row.action] - row.target;
    loss += e * e;
  }
  return loss / static_cast<double>(batch.size());
}

}  // namespace toric::oracle
