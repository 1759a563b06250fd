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

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "toric/lattice.hpp"

namespace toric {

/// Syndrome translated so that one defect sits on the center cell
/// ((d - 1) / 2, (d - 1) / 2). Cells hold 1 for a defect and 0 otherwise.
class Perspective {
 public:
  explicit Perspective(int d);
  Perspective(int d, std::vector<std::uint8_t> grid);

  int distance() const { return d_; }
  int center() const { return (d_ - 1) / 2; }
  std::uint8_t at(int r, int c) const { return grid_[static_cast<std::size_t>(r) * d_ + c]; }
  void set(int r, int c, std::uint8_t v) { grid_[static_cast<std::size_t>(r) * d_ + c] = v; }
  std::span<const std::uint8_t> cells() const { return grid_; }
  std::size_t ones() const;

  bool operator==(const Perspective&) const = default;

 private:
  int d_;
  std::vector<std::uint8_t> grid_;
};

/// One perspective per defect, in row-major defect order.
using Observation = std::vector<Perspective>;

/// Grid of the syndrome shifted so `origin` lands on the center cell. The
/// origin need not be a defect.
Perspective centered_grid(const Syndrome& syndrome, Coord origin);

/// Throws ContractViolation if `defect` is not part of the syndrome.
Perspective perspective_of(const Syndrome& syndrome, Coord defect);

Observation observation_of(const Syndrome& syndrome);

/// Quarter turn clockwise: cell (r, c) -> (c, d - 1 - r).
Direction rotate90(Direction dir);
Perspective rotate90(const Perspective& p);
std::pair<Perspective, Direction> rotate90(const Perspective& p, Direction dir);

}  // namespace toric
