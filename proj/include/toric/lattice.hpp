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

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "toric/rng.hpp"

namespace toric {

/// Linear size of the torus: d x d plaquettes carrying 2 d^2 edge qubits.
/// Only odd d >= 3 is accepted, so every plaquette can act as the lattice
/// center and wrap-around distances never tie.
class CodeDistance {
 public:
  explicit CodeDistance(int d);
  int value() const { return d_; }
  int center() const { return (d_ - 1) / 2; }
  int num_qubits() const { return 2 * d_ * d_; }
  auto operator<=>(const CodeDistance&) const = default;

 private:
  int d_;
};

/// Plaquette coordinate; row grows downward, column grows to the right.
struct Coord {
  int row = 0;
  int col = 0;
  auto operator<=>(const Coord&) const = default;
};

/// Order matches the Q-network output layer.
enum class Direction : std::uint8_t { Up = 0, Down = 1, Right = 2, Left = 3 };

inline constexpr std::array<Direction, 4> kDirections = {Direction::Up, Direction::Down, Direction::Right,
                                                         Direction::Left};

const char* to_string(Direction dir);

/// Row/column displacement of a single step.
Coord step_of(Direction dir);

/// Neighbouring plaquette with periodic wrap.
Coord neighbor(Coord p, Direction dir, int d);

struct Action {
  Coord defect;
  Direction direction = Direction::Up;
  auto operator<=>(const Action&) const = default;
};

/// Full bit-flip record of the 2 d^2 qubits (errors xor corrections).
///
/// top(r, c) is the qubit on the top edge of plaquette (r, c), which is also
/// the bottom edge of plaquette ((r - 1) mod d, c). left(r, c) is the qubit on
/// the west edge of (r, c), also the east edge of (r, (c - 1) mod d).
class HiddenState {
 public:
  explicit HiddenState(CodeDistance d);

  int distance() const { return d_; }

  bool top(int r, int c) const { return top_[index(r, c)] != 0; }
  bool left(int r, int c) const { return left_[index(r, c)] != 0; }
  void set_top(int r, int c, bool v) { top_[index(r, c)] = v ? 1 : 0; }
  void set_left(int r, int c, bool v) { left_[index(r, c)] = v ? 1 : 0; }
  void flip_top(int r, int c) { top_[index(r, c)] ^= 1; }
  void flip_left(int r, int c) { left_[index(r, c)] ^= 1; }

  /// Toggles the qubit separating plaquette p from its neighbour in `dir`.
  void flip_edge(Coord p, Direction dir);

  /// Parity of the four qubits around plaquette p.
  bool plaquette_parity(Coord p) const;

  std::size_t flip_count() const;

  /// Qubit bits in storage order: all top edges row-major, then all left edges.
  std::span<const std::uint8_t> top_bits() const { return top_; }
  std::span<const std::uint8_t> left_bits() const { return left_; }

  bool operator==(const HiddenState&) const = default;

 private:
  std::size_t index(int r, int c) const { return static_cast<std::size_t>(r) * d_ + c; }

  int d_;
  std::vector<std::uint8_t> top_;
  std::vector<std::uint8_t> left_;
};

/// Plaquettes with odd flip parity, kept sorted in row-major order.
class Syndrome {
 public:
  Syndrome(int d, std::vector<Coord> defects);

  int distance() const { return d_; }
  const std::vector<Coord>& defects() const { return defects_; }
  std::size_t size() const { return defects_.size(); }
  bool empty() const { return defects_.empty(); }
  bool contains(Coord p) const;

  bool operator==(const Syndrome&) const = default;

 private:
  int d_;
  std::vector<Coord> defects_;
};

/// Toggles every qubit independently with probability p.
HiddenState apply_iid_errors(const HiddenState& state, double p, Rng& rng);
void apply_iid_errors_inplace(HiddenState& state, double p, Rng& rng);

Syndrome compute_syndrome(const HiddenState& state);

/// Moves the defect at action.defect one plaquette in action.direction by
/// flipping the shared edge. Throws ContractViolation if no defect is there.
HiddenState apply_action(const HiddenState& state, const Action& action);
void apply_action_inplace(HiddenState& state, const Action& action);

struct WindingParities {
  bool vertical = false;
  bool horizontal = false;
  bool logical_failure() const { return vertical || horizontal; }
  bool operator==(const WindingParities&) const = default;
};

/// Parities of the closed chain across the row-0 and column-0 cuts.
/// Requires an empty syndrome.
WindingParities winding_parities(const HiddenState& state);

}  // namespace toric
