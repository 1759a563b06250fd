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

#include "toric/lattice.hpp"

#include <algorithm>
#include <stdexcept>

#include "toric/error.hpp"

namespace toric {

namespace {

int wrap(int x, int d) { return ((x % d) + d) % d; }

void check_coord(Coord p, int d) {
  if (p.row < 0 || p.row >= d || p.col < 0 || p.col >= d) {
    throw std::invalid_argument("plaquette (" + std::to_string(p.row) + ", " + std::to_string(p.col) +
                                ") outside a " + std::to_string(d) + "x" + std::to_string(d) + " torus");
  }
}

}  // namespace

CodeDistance::CodeDistance(int d) : d_(d) {
  if (d < 3 || d % 2 == 0) {
    throw std::invalid_argument("code distance must be odd and >= 3, got " + std::to_string(d));
  }
}

const char* to_string(Direction dir) {
  switch (dir) {
    case Direction::Up:
      return "up";
    case Direction::Down:
      return "down";
    case Direction::Right:
      return "right";
    case Direction::Left:
      return "left";
  }
  return "?";
}

Coord step_of(Direction dir) {
  switch (dir) {
    case Direction::Up:
      return {-1, 0};
    case Direction::Down:
      return {1, 0};
    case Direction::Right:
      return {0, 1};
    case Direction::Left:
      return {0, -1};
  }
  return {0, 0};
}

Coord neighbor(Coord p, Direction dir, int d) {
  Coord s = step_of(dir);
  return {wrap(p.row + s.row, d), wrap(p.col + s.col, d)};
}

HiddenState::HiddenState(CodeDistance d)
    : d_(d.value()),
      top_(static_cast<std::size_t>(d_) * d_, 0),
      left_(static_cast<std::size_t>(d_) * d_, 0) {}

void HiddenState::flip_edge(Coord p, Direction dir) {
  switch (dir) {
    case Direction::Up:
      flip_top(p.row, p.col);
      break;
    case Direction::Down:
      flip_top(wrap(p.row + 1, d_), p.col);
      break;
    case Direction::Left:
      flip_left(p.row, p.col);
      break;
    case Direction::Right:
      flip_left(p.row, wrap(p.col + 1, d_));
      break;
  }
}

bool HiddenState::plaquette_parity(Coord p) const {
  int down = p.row + 1 == d_ ? 0 : p.row + 1;
  int right = p.col + 1 == d_ ? 0 : p.col + 1;
  return (top_[index(p.row, p.col)] ^ top_[index(down, p.col)] ^ left_[index(p.row, p.col)] ^
          left_[index(p.row, right)]) != 0;
}

std::size_t HiddenState::flip_count() const {
  return static_cast<std::size_t>(std::count(top_.begin(), top_.end(), 1) +
                                  std::count(left_.begin(), left_.end(), 1));
}

Syndrome::Syndrome(int d, std::vector<Coord> defects) : d_(d), defects_(std::move(defects)) {
  for (Coord p : defects_) check_coord(p, d_);
  std::sort(defects_.begin(), defects_.end());
  if (std::adjacent_find(defects_.begin(), defects_.end()) != defects_.end()) {
    throw std::invalid_argument("syndrome lists a plaquette twice");
  }
}

bool Syndrome::contains(Coord p) const { return std::binary_search(defects_.begin(), defects_.end(), p); }

void apply_iid_errors_inplace(HiddenState& state, double p, Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("error probability must lie in [0, 1], got " + std::to_string(p));
  }
  const int d = state.distance();
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) {
      if (rng.bernoulli(p)) state.flip_top(r, c);
    }
  }
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) {
      if (rng.bernoulli(p)) state.flip_left(r, c);
    }
  }
}

HiddenState apply_iid_errors(const HiddenState& state, double p, Rng& rng) {
  HiddenState out = state;
  apply_iid_errors_inplace(out, p, rng);
  return out;
}

Syndrome compute_syndrome(const HiddenState& state) {
  const int d = state.distance();
  std::vector<Coord> defects;
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) {
      if (state.plaquette_parity({r, c})) defects.push_back({r, c});
    }
  }
  return Syndrome(d, std::move(defects));
}

void apply_action_inplace(HiddenState& state, const Action& action) {
  check_coord(action.defect, state.distance());
  if (!state.plaquette_parity(action.defect)) {
    throw ContractViolation("action on plaquette (" + std::to_string(action.defect.row) + ", " +
                            std::to_string(action.defect.col) + ") which holds no defect");
  }
  state.flip_edge(action.defect, action.direction);
}

HiddenState apply_action(const HiddenState& state, const Action& action) {
  HiddenState out = state;
  apply_action_inplace(out, action);
  return out;
}

WindingParities winding_parities(const HiddenState& state) {
  const int d = state.distance();
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) {
      if (state.plaquette_parity({r, c})) {
        throw ContractViolation("winding parities are only defined for an empty syndrome");
      }
    }
  }
  WindingParities w;
  for (int c = 0; c < d; ++c) w.vertical ^= state.top(0, c);
  for (int r = 0; r < d; ++r) w.horizontal ^= state.left(r, 0);
  return w;
}

}  // namespace toric
