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

#include "toric/encoding.hpp"

#include <algorithm>
#include <stdexcept>

#include "toric/error.hpp"

namespace toric {

Perspective::Perspective(int d) : d_(d), grid_(static_cast<std::size_t>(d) * d, 0) {}

Perspective::Perspective(int d, std::vector<std::uint8_t> grid) : d_(d), grid_(std::move(grid)) {
  if (grid_.size() != static_cast<std::size_t>(d) * d) {
    throw std::invalid_argument("perspective grid must hold d*d cells");
  }
}

std::size_t Perspective::ones() const {
  return static_cast<std::size_t>(std::count_if(grid_.begin(), grid_.end(), [](auto v) { return v != 0; }));
}

Perspective centered_grid(const Syndrome& syndrome, Coord origin) {
  const int d = syndrome.distance();
  const int c = (d - 1) / 2;
  Perspective out(d);
  for (Coord e : syndrome.defects()) {
    int r = ((e.row - origin.row + c) % d + d) % d;
    int k = ((e.col - origin.col + c) % d + d) % d;
    out.set(r, k, 1);
  }
  return out;
}

Perspective perspective_of(const Syndrome& syndrome, Coord defect) {
  if (!syndrome.contains(defect)) {
    throw ContractViolation("perspective requested for a plaquette that is not a defect");
  }
  return centered_grid(syndrome, defect);
}

Observation observation_of(const Syndrome& syndrome) {
  Observation obs;
  obs.reserve(syndrome.size());
  for (Coord e : syndrome.defects()) obs.push_back(centered_grid(syndrome, e));
  return obs;
}

Direction rotate90(Direction dir) {
  switch (dir) {
    case Direction::Up:
      return Direction::Right;
    case Direction::Right:
      return Direction::Down;
    case Direction::Down:
      return Direction::Left;
    case Direction::Left:
      return Direction::Up;
  }
  return dir;
}

Perspective rotate90(const Perspective& p) {
  const int d = p.distance();
  Perspective out(d);
  for (int r = 0; r < d; ++r) {
    for (int k = 0; k < d; ++k) out.set(k, d - 1 - r, p.at(r, k));
  }
  return out;
}

std::pair<Perspective, Direction> rotate90(const Perspective& p, Direction dir) {
  return {rotate90(p), rotate90(dir)};
}

}  // namespace toric
