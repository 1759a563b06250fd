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
#include <string>
#include <vector>

#include "toric/lattice.hpp"

namespace toric {

/// Hidden-state file layout, little-endian:
///
///   magic    8 bytes "TORICDS\0"
///   version  u32 (kDatasetVersion)
///   d        u32
///   p        f64
///   count    u64
///   seed     u64
///   count records of ceil(2 d^2 / 8) bytes: qubit bits LSB-first, all top
///   edges row-major followed by all left edges row-major
inline constexpr std::uint32_t kDatasetVersion = 1;

/// Samples are generated in shards of this size, each from its own stream, so
/// any shard can be regenerated (or produced on another worker) on its own.
inline constexpr std::uint64_t kShardSize = 4096;

struct Dataset {
  int d = 3;
  double p = 0.0;
  std::uint64_t seed = 0;
  std::vector<HiddenState> states;
};

/// Error configurations for samples [first, first + count) of the stream
/// identified by seed.
std::vector<HiddenState> sample_states(int d, double p, std::uint64_t seed, std::uint64_t first, std::uint64_t count);
std::vector<HiddenState> sample_states(int d, double p, std::uint64_t seed, std::uint64_t count);

void write_dataset(const std::string& path, const Dataset& dataset);
Dataset read_dataset(const std::string& path);

Dataset generate_dataset(int d, double p, std::uint64_t count, std::uint64_t seed, const std::string& path);

}  // namespace toric
