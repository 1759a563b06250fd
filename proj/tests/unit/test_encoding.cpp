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

#include "toric/encoding.hpp"
#include "toric/error.hpp"

namespace toric {
namespace {

Coord rotate_cell(Coord p, int d) { return {p.col, d - 1 - p.row}; }

// Quarter turn of the whole lattice, edges included.
HiddenState rotate_state(const HiddenState& s) {
  const int d = s.distance();
  HiddenState out{CodeDistance(d)};
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) {
      // top(r,c) separates (r-1,c) and (r,c); they land side by side.
      if (s.top(r, c)) out.flip_left(c, (d - r) % d);
      // left(r,c) separates (r,c-1) and (r,c); they land one above the other.
      if (s.left(r, c)) out.flip_top(c, d - 1 - r);
    }
  }
  return out;
}

Syndrome rotate_syndrome(const Syndrome& s) {
  std::vector<Coord> out;
  for (Coord p : s.defects()) out.push_back(rotate_cell(p, s.distance()));
  return Syndrome(s.distance(), out);
}

TEST(Perspective, PutsChosenDefectAtCenter) {
  const Syndrome s(5, {{0, 0}, {1, 3}});
  const Perspective p = perspective_of(s, {0, 0});
  EXPECT_EQ(p.at(2, 2), 1);
  EXPECT_EQ(p.at(3, 0), 1);  // (1,3) shifted by (+2,+2) wraps to (3,0)
  EXPECT_EQ(p.ones(), 2u);
}

TEST(Perspective, RejectsNonDefect) {
  const Syndrome s(5, {{0, 0}, {1, 3}});
  EXPECT_THROW(perspective_of(s, {2, 2}), ContractViolation);
}

TEST(Observation, OnePerspectivePerDefectInRowMajorOrder) {
  const Syndrome s(5, {{4, 4}, {0, 1}, {2, 0}, {2, 3}});
  const Observation obs = observation_of(s);
  ASSERT_EQ(obs.size(), 4u);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    EXPECT_EQ(obs[i], perspective_of(s, s.defects()[i]));
    EXPECT_EQ(obs[i].ones(), 4u);
    EXPECT_EQ(obs[i].at(2, 2), 1);
  }
  EXPECT_TRUE(observation_of(Syndrome(5, {})).empty());
}

TEST(Perspective, CellsAreTheShiftedSyndrome) {
  const int d = 7;
  const Syndrome s(d, {{0, 0}, {3, 5}, {6, 1}, {2, 2}});
  for (Coord o : s.defects()) {
    const Perspective p = perspective_of(s, o);
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) {
        const Coord source{(r - 3 + o.row + d) % d, (c - 3 + o.col + d) % d};
        EXPECT_EQ(p.at(r, c) == 1, s.contains(source));
      }
    }
  }
}

TEST(Rotation, DirectionCycle) {
  EXPECT_EQ(rotate90(Direction::Up), Direction::Right);
  EXPECT_EQ(rotate90(Direction::Right), Direction::Down);
  EXPECT_EQ(rotate90(Direction::Down), Direction::Left);
  EXPECT_EQ(rotate90(Direction::Left), Direction::Up);
}

TEST(Rotation, FourQuarterTurnsAreIdentity) {
  const Syndrome s(5, {{0, 0}, {1, 3}, {4, 2}, {3, 3}});
  for (const auto& p : observation_of(s)) {
    Perspective q = p;
    for (int i = 0; i < 4; ++i) q = rotate90(q);
    EXPECT_EQ(q, p);
    EXPECT_NE(rotate90(p), p);
    EXPECT_EQ(rotate90(p).at(2, 2), 1);  // center is fixed
  }
}

TEST(Rotation, CellMapIsClockwise) {
  Perspective p(3);
  p.set(0, 1, 1);  // just above the center
  const Perspective q = rotate90(p);
  EXPECT_EQ(q.at(1, 2), 1);  // now just right of the center
  EXPECT_EQ(q.ones(), 1u);
}

TEST(Rotation, PairOverloadTurnsBoth) {
  Perspective p(3);
  p.set(0, 0, 1);
  const auto [q, dir] = rotate90(p, Direction::Left);
  EXPECT_EQ(q, rotate90(p));
  EXPECT_EQ(dir, Direction::Up);
}

// Turning the lattice commutes with syndrome extraction, perspective encoding
// and actions.
TEST(Rotation, EquivariantWithTheDynamics) {
  Rng rng(3);
  for (int d : {3, 5, 7}) {
    const HiddenState zero{CodeDistance(d)};
    for (int trial = 0; trial < 300; ++trial) {
      const HiddenState s = apply_iid_errors(zero, 0.15, rng);
      const HiddenState rs = rotate_state(s);
      const Syndrome syn = compute_syndrome(s);
      ASSERT_EQ(compute_syndrome(rs), rotate_syndrome(syn));
      for (Coord p : syn.defects()) {
        EXPECT_EQ(perspective_of(compute_syndrome(rs), rotate_cell(p, d)), rotate90(perspective_of(syn, p)));
        for (Direction dir : kDirections) {
          const HiddenState a = rotate_state(apply_action(s, {p, dir}));
          const HiddenState b = apply_action(rs, {rotate_cell(p, d), rotate90(dir)});
          EXPECT_EQ(a, b);
        }
      }
    }
  }
}

}  // namespace
}  // namespace toric
