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
#include <utility>
#include <vector>

#include "toric/lattice.hpp"

namespace toric {

/// Manhattan distance on the d x d torus.
int torus_distance(Coord a, Coord b, int d);

/// Symmetric matrix of pairwise defect distances.
class DistanceMatrix {
 public:
  explicit DistanceMatrix(int n);
  DistanceMatrix(int n, std::vector<int> entries);

  static DistanceMatrix from_syndrome(const Syndrome& syndrome);

  int size() const { return n_; }
  int at(int i, int j) const { return w_[static_cast<std::size_t>(i) * n_ + j]; }
  void set(int i, int j, int w);

  /// Principal submatrix on the given (ascending) indices.
  DistanceMatrix restricted(const std::vector<int>& indices) const;

 private:
  int n_;
  std::vector<int> w_;
};

/// Perfect matching as (i, j) pairs with i < j, sorted by i.
struct Matching {
  std::vector<std::pair<int, int>> pairs;
  long long weight = 0;
  bool operator==(const Matching&) const = default;
};

struct MatchingOptions {
  /// Largest defect count handed to the subset dynamic program. Above it the
  /// partners of the lowest nodes are fixed in blocks by blossom solves on a
  /// tie-ranked objective until the rest fits the dynamic program; the result
  /// is identical either way, only the running time changes.
  int dp_max_defects = 12;
};

/// Minimum total weight perfect matching. Among optimal matchings the
/// lexicographically smallest pair list is returned. Throws
/// ContractViolation for an odd number of nodes.
Matching min_weight_perfect_matching(const DistanceMatrix& dist, const MatchingOptions& options = {});

/// Exact solver by memoised subset recursion (the lowest unmatched index is
/// always paired next, so only O(Fib(n)) subsets are ever visited).
Matching subset_dp_matching(const DistanceMatrix& dist);

/// Weighted Edmonds blossom algorithm (primal-dual, O(n^3)). Returns an
/// optimal matching with no particular tie-break.
Matching blossom_matching(const DistanceMatrix& dist);

/// Maximum weight matching on a general graph. Returns mate[v] or -1. With
/// max_cardinality the result is the heaviest among maximum-cardinality
/// matchings.
struct WeightedEdge {
  int u;
  int v;
  long long weight;
};
std::vector<int> max_weight_matching(int num_vertices, const std::vector<WeightedEdge>& edges,
                                     bool max_cardinality);

/// Shortest move sequence carrying a defect from `from` onto `to`: all row
/// moves first, then all column moves, each along the shorter way round.
std::vector<Direction> correction_path(Coord from, Coord to, int d);

struct MwpmResult {
  HiddenState final_state;
  bool success = false;
  int steps = 0;
};

MwpmResult mwpm_decode(const HiddenState& state, const MatchingOptions& options = {});

}  // namespace toric
