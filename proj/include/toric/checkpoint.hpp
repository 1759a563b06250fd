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
#include <optional>
#include <stdexcept>
#include <string>

#include "toric/network.hpp"

namespace toric {

/// Binary checkpoint layout, all integers and floats little-endian:
///
///   magic        8 bytes  "TORICQN\0"
///   version      u32      (kCheckpointVersion)
///   float width  u32      bytes per stored real (8)
///   d, conv filters, kernel, stride, outputs, #dense widths  u32 each
///   dense widths u32 each
///   learning steps, episodes, sync counter                   u64 each
///   #tensors     u32, then per tensor: rank u32, dims u32...
///   adam step u64; learning rate, beta1, beta2, epsilon, decay f64
///   parameters, then Adam first moments, then second moments (f64 row-major)
///   checksum     u64      FNV-1a over every preceding byte
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct TrainingCounters {
  std::uint64_t learning_steps = 0;
  std::uint64_t episodes = 0;
  std::uint64_t steps_since_sync = 0;
  bool operator==(const TrainingCounters&) const = default;
};

struct Checkpoint {
  QNetwork network;
  AdamState optimizer;
  TrainingCounters counters;
};

class CheckpointError : public std::runtime_error {
 public:
  enum class Kind { Io, Format, Version, Corrupt, Shape };
  CheckpointError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

void save_checkpoint(const std::string& path, const QNetwork& net, const AdamState& opt,
                     const TrainingCounters& counters = {});

/// Throws CheckpointError. When `expected` is given, an architecture mismatch
/// raises Kind::Shape.
Checkpoint load_checkpoint(const std::string& path, const std::optional<Architecture>& expected = std::nullopt);

}  // namespace toric
