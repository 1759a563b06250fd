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

#include "toric/matching.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <stdexcept>

#include "toric/error.hpp"

namespace toric {

int torus_distance(Coord a, Coord b, int d) {
  int dr = std::abs(a.row - b.row);
  int dc = std::abs(a.col - b.col);
  return std::min(dr, d - dr) + std::min(dc, d - dc);
}

DistanceMatrix::DistanceMatrix(int n) : n_(n), w_(static_cast<std::size_t>(n) * n, 0) {
  if (n < 0) throw std::invalid_argument("negative matrix size");
}

DistanceMatrix::DistanceMatrix(int n, std::vector<int> entries) : n_(n), w_(std::move(entries)) {
  if (w_.size() != static_cast<std::size_t>(n) * n) throw std::invalid_argument("distance matrix must be n*n");
  for (int i = 0; i < n; ++i) {
    if (at(i, i) != 0) throw std::invalid_argument("distance matrix diagonal must be zero");
    for (int j = 0; j < n; ++j) {
      if (at(i, j) != at(j, i) || at(i, j) < 0) {
        throw std::invalid_argument("distance matrix must be symmetric and non-negative");
      }
    }
  }
}

DistanceMatrix DistanceMatrix::from_syndrome(const Syndrome& syndrome) {
  const auto& e = syndrome.defects();
  const int n = static_cast<int>(e.size());
  DistanceMatrix m(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) m.set(i, j, torus_distance(e[i], e[j], syndrome.distance()));
  }
  return m;
}

void DistanceMatrix::set(int i, int j, int w) {
  w_[static_cast<std::size_t>(i) * n_ + j] = w;
  w_[static_cast<std::size_t>(j) * n_ + i] = w;
}

DistanceMatrix DistanceMatrix::restricted(const std::vector<int>& indices) const {
  const int m = static_cast<int>(indices.size());
  DistanceMatrix out(m);
  for (int a = 0; a < m; ++a) {
    for (int b = a + 1; b < m; ++b) out.set(a, b, at(indices[a], indices[b]));
  }
  return out;
}

namespace {

void require_even(int n) {
  if (n % 2 != 0) {
    throw ContractViolation("perfect matching needs an even number of nodes, got " + std::to_string(n));
  }
}

// Open-addressing memo keyed by the mask of still-unmatched nodes.
class SubsetMemo {
 public:
  explicit SubsetMemo(int n) {
    // Reachable subsets number Fib(n + 1); keep the load factor below 1/2.
    std::uint64_t a = 1, b = 1;
    for (int i = 0; i < n; ++i) {
      std::uint64_t t = a + b;
      a = b;
      b = t;
    }
    std::size_t cap = 16;
    while (cap < 2 * b) cap <<= 1;
    keys_.assign(cap, kEmpty);
    values_.assign(cap, 0);
    mask_ = cap - 1;
  }

  int* find_or_insert(std::uint64_t key, bool& inserted) {
    std::size_t h = static_cast<std::size_t>((key * 0x9e3779b97f4a7c15ULL) >> 17) & mask_;
    while (keys_[h] != kEmpty && keys_[h] != key) h = (h + 1) & mask_;
    inserted = keys_[h] == kEmpty;
    keys_[h] = key;
    return &values_[h];
  }

 private:
  static constexpr std::uint64_t kEmpty = ~std::uint64_t{0};
  std::vector<std::uint64_t> keys_;
  std::vector<int> values_;
  std::size_t mask_ = 0;
};

class SubsetSolver {
 public:
  explicit SubsetSolver(const DistanceMatrix& dist) : dist_(dist), memo_(dist.size()) {}

  int solve(std::uint64_t mask) {
    if (mask == 0) return 0;
    bool inserted = false;
    int* slot = memo_.find_or_insert(mask, inserted);
    if (!inserted) return *slot;
    const int i = std::countr_zero(mask);
    const std::uint64_t rest = mask & (mask - 1);
    int best = std::numeric_limits<int>::max();
    for (std::uint64_t m = rest; m != 0; m &= m - 1) {
      const int j = std::countr_zero(m);
      const int v = dist_.at(i, j) + solve(rest & ~(std::uint64_t{1} << j));
      best = std::min(best, v);
    }
    // The table never rehashes, so `slot` is still valid here.
    *slot = best;
    return best;
  }

  Matching reconstruct(std::uint64_t mask) {
    Matching out;
    out.weight = solve(mask);
    while (mask != 0) {
      const int i = std::countr_zero(mask);
      const std::uint64_t rest = mask & (mask - 1);
      const int target = solve(mask);
      for (std::uint64_t m = rest; m != 0; m &= m - 1) {
        const int j = std::countr_zero(m);
        const std::uint64_t next = rest & ~(std::uint64_t{1} << j);
        if (dist_.at(i, j) + solve(next) == target) {
          out.pairs.emplace_back(i, j);
          mask = next;
          break;
        }
      }
    }
    return out;
  }

 private:
  const DistanceMatrix& dist_;
  SubsetMemo memo_;
};

long long matching_weight(const DistanceMatrix& dist, const std::vector<std::pair<int, int>>& pairs) {
  long long w = 0;
  for (auto [i, j] : pairs) w += dist.at(i, j);
  return w;
}

// How many of the lowest nodes can have their partners ranked in one solve:
// the rank term for node i is scaled by m^(L-1-i), and the whole perturbed
// objective must stay far inside 64 bits after the solver doubles it.
int rank_levels(int m, int max_w) {
  int levels = 1;
  while (levels < m) {
    __int128 scale = 1;
    for (int i = 0; i < levels + 1; ++i) scale *= m;
    const __int128 total = (static_cast<__int128>(max_w) * m + 1) * (scale + 1) * 4;
    if (total >= (static_cast<__int128>(1) << 60)) break;
    ++levels;
  }
  return levels;
}

// Partners of the lowest `levels` nodes in the lexicographically smallest
// minimum-weight perfect matching, from one blossom solve. Edge (i, j), i < j,
// gets weight w * K + j * m^(levels-1-i) for i < levels; K exceeds every rank
// sum, so weight is optimised first and the ranks break ties. The ranks order
// matchings exactly as the pair lists do on those nodes because a node's rank
// term outweighs all higher nodes' terms together.
std::vector<int> ranked_partners(const DistanceMatrix& dist, int levels) {
  const int m = dist.size();
  std::vector<long long> place(levels);
  long long k = 1;
  long long p = 1;
  for (int i = levels - 1; i >= 0; --i) {
    place[i] = p;
    k += (m - 1) * p;
    if (i > 0) p *= m;
  }
  long long max_w = 0;
  std::vector<WeightedEdge> edges;
  edges.reserve(static_cast<std::size_t>(m) * (m - 1) / 2);
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      const long long w = dist.at(i, j) * k + (i < levels ? j * place[i] : 0);
      max_w = std::max(max_w, w);
      edges.push_back({i, j, w});
    }
  }
  for (auto& e : edges) e.weight = max_w + 1 - e.weight;
  std::vector<int> mate = max_weight_matching(m, edges, true);
  mate.resize(levels);
  return mate;
}

}  // namespace

Matching subset_dp_matching(const DistanceMatrix& dist) {
  const int n = dist.size();
  require_even(n);
  if (n > 62) throw std::invalid_argument("subset matching supports at most 62 nodes");
  if (n == 0) return {};
  SubsetSolver solver(dist);
  const std::uint64_t full = (std::uint64_t{1} << n) - 1;
  return solver.reconstruct(full);
}

Matching blossom_matching(const DistanceMatrix& dist) {
  const int n = dist.size();
  require_even(n);
  if (n == 0) return {};
  int max_w = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) max_w = std::max(max_w, dist.at(i, j));
  }
  // Maximising sum(C - w) over perfect matchings minimises sum(w).
  std::vector<WeightedEdge> edges;
  edges.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) edges.push_back({i, j, static_cast<long long>(max_w + 1 - dist.at(i, j))});
  }
  std::vector<int> mate = max_weight_matching(n, edges, true);
  Matching out;
  for (int i = 0; i < n; ++i) {
    if (mate[i] < 0) throw std::logic_error("blossom solver returned an imperfect matching");
    if (i < mate[i]) out.pairs.emplace_back(i, mate[i]);
  }
  out.weight = matching_weight(dist, out.pairs);
  return out;
}

Matching min_weight_perfect_matching(const DistanceMatrix& dist, const MatchingOptions& options) {
  const int n = dist.size();
  require_even(n);
  if (n <= options.dp_max_defects) return subset_dp_matching(dist);

  // Fix the canonical partners of the lowest remaining nodes a block at a
  // time, until the remainder fits the dynamic program.
  std::vector<int> remaining(n);
  for (int i = 0; i < n; ++i) remaining[i] = i;
  Matching out;
  while (!remaining.empty() && static_cast<int>(remaining.size()) > options.dp_max_defects) {
    const DistanceMatrix sub = dist.restricted(remaining);
    const int m = sub.size();
    int max_w = 0;
    for (int i = 0; i < m; ++i) {
      for (int j = i + 1; j < m; ++j) max_w = std::max(max_w, sub.at(i, j));
    }
    const int levels = rank_levels(m, max_w);
    const std::vector<int> mate = ranked_partners(sub, levels);
    std::vector<bool> taken(m, false);
    for (int i = 0; i < levels; ++i) {
      if (mate[i] > i) {
        out.pairs.emplace_back(remaining[i], remaining[mate[i]]);
        taken[i] = taken[mate[i]] = true;
      } else if (mate[i] < 0) {
        throw std::logic_error("blossom solver returned an imperfect matching");
      }
    }
    std::vector<int> rest;
    for (int i = 0; i < m; ++i) {
      if (!taken[i]) rest.push_back(remaining[i]);
    }
    remaining = std::move(rest);
  }
  if (!remaining.empty()) {
    const Matching tail = subset_dp_matching(dist.restricted(remaining));
    for (auto [a, b] : tail.pairs) out.pairs.emplace_back(remaining[a], remaining[b]);
  }
  std::sort(out.pairs.begin(), out.pairs.end());
  out.weight = matching_weight(dist, out.pairs);
  return out;
}

std::vector<Direction> correction_path(Coord from, Coord to, int d) {
  std::vector<Direction> moves;
  const int dr = ((from.row - to.row) % d + d) % d;
  const int dc = ((from.col - to.col) % d + d) % d;
  if (dr <= d / 2) {
    moves.insert(moves.end(), dr, Direction::Up);
  } else {
    moves.insert(moves.end(), d - dr, Direction::Down);
  }
  if (dc <= d / 2) {
    moves.insert(moves.end(), dc, Direction::Left);
  } else {
    moves.insert(moves.end(), d - dc, Direction::Right);
  }
  return moves;
}

MwpmResult mwpm_decode(const HiddenState& state, const MatchingOptions& options) {
  const int d = state.distance();
  Syndrome syndrome = compute_syndrome(state);
  Matching m = min_weight_perfect_matching(DistanceMatrix::from_syndrome(syndrome), options);
  MwpmResult out{state, false, 0};
  const auto& defects = syndrome.defects();
  for (auto [i, j] : m.pairs) {
    Coord at = defects[i];
    for (Direction dir : correction_path(defects[i], defects[j], d)) {
      // Paths of different pairs may cross, so flip edges directly rather
      // than through the defect-checked action.
      out.final_state.flip_edge(at, dir);
      at = neighbor(at, dir, d);
      ++out.steps;
    }
  }
  out.success = !winding_parities(out.final_state).logical_failure();
  return out;
}

}  // namespace toric
