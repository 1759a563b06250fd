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
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "toric/dqn.hpp"
#include "toric/matching.hpp"

namespace toric {

enum class DecoderKind { Mwpm, Dqn };

inline constexpr int kRunConfigVersion = 1;

/// Everything a CLI run needs. Serialises to a versioned JSON document; a
/// run is reproducible from the config alone.
struct RunConfig {
  int version = kRunConfigVersion;
  std::vector<int> distances = {5};
  std::vector<double> error_rates = {0.1};
  std::uint64_t samples = 10'000;
  std::uint64_t seed = 1;
  DecoderKind decoder = DecoderKind::Mwpm;
  std::string checkpoint;
  std::string dataset;
  std::string csv_path;
  std::string json_path;
  int threads = 1;
  AgentConfig agent;
  MatchingOptions matching;

  // Training.
  std::uint64_t episodes = 10'000;
  std::uint64_t eval_every = 1'000;
  std::uint64_t validation_size = 1'000;
  std::uint64_t validation_seed = 7;
  std::uint64_t checkpoint_every = 1'000;
  std::string log_path;
  bool resume = false;

  void validate() const;
};

nlohmann::json to_json(const RunConfig& config);
/// Missing keys keep the defaults in `base`; unknown keys are rejected.
RunConfig run_config_from_json(const nlohmann::json& doc, RunConfig base = {});
RunConfig load_run_config(const std::string& path, RunConfig base = {});

struct DecodeOutcome {
  bool success = false;
  int steps = 0;
};

/// Thread-safe decoder: one instance is shared by every worker.
using Decoder = std::function<DecodeOutcome(const HiddenState&)>;

Decoder mwpm_decoder(const MatchingOptions& options = {});
Decoder dqn_decoder(std::shared_ptr<const QNetwork> net, int max_steps);

struct SweepPoint {
  int d = 0;
  double p = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t successes = 0;
  std::uint64_t fails = 0;
  double success_rate = 0.0;
  double fail_rate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double mean_steps = 0.0;
  double wall_time_s = 0.0;
  std::uint64_t seed = 0;
  std::string decoder;
};

struct SweepResult {
  std::vector<SweepPoint> points;
};

/// Seed of the (d, p) point of a sweep with the given master seed.
std::uint64_t point_seed(std::uint64_t master_seed, int d, double p);

/// Decodes `samples` fresh error configurations drawn from `seed`. Shards are
/// aggregated in shard order, so the result does not depend on `threads`.
SweepPoint run_point(int d, double p, std::uint64_t samples, std::uint64_t seed, const Decoder& decoder,
                     const std::string& decoder_name, int threads = 1);

/// Same, over a fixed list of hidden states.
SweepPoint run_point(std::span<const HiddenState> states, double p, std::uint64_t seed, const Decoder& decoder,
                     const std::string& decoder_name, int threads = 1);

SweepResult sweep(const RunConfig& config);

inline const std::vector<std::string> kSweepCsvColumns = {
    "d",       "p",       "samples",    "successes", "fails",       "success_rate", "fail_rate",
    "ci_low", "ci_high", "mean_steps", "wall_time_s", "seed",      "decoder"};

std::string sweep_csv(const SweepResult& result);
nlohmann::json sweep_json(const SweepResult& result);

/// Leading-order MWPM logical failure rate for small p:
/// odd d: 2 d C(d, ceil(d/2)) p^ceil(d/2); even d: d C(d, d/2) p^(d/2).
double asymptotic_fail_rate(int d, double p);
int asymptotic_exponent(int d);

struct AsymptoticPoint {
  double p = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t failures = 0;
  double fail_rate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double prediction = 0.0;
  double ratio = 0.0;
  std::uint64_t seed = 0;
};

struct AsymptoticReport {
  int d = 0;
  int exponent = 0;
  std::vector<AsymptoticPoint> points;
  /// Least-squares slope of log p_L against log p over points with failures.
  double slope = 0.0;
  double intercept = 0.0;
  /// Measured over predicted p_L at the smallest p.
  double ratio_at_smallest = 0.0;
};

AsymptoticReport asymptotic_check(int d, const std::vector<double>& error_rates,
                                  const std::vector<std::uint64_t>& samples, std::uint64_t seed, int threads = 1,
                                  const MatchingOptions& options = {});
nlohmann::json asymptotic_json(const AsymptoticReport& report);

/// "r,c;r,c;..." -> plaquette list.
std::vector<Coord> parse_defects(const std::string& text);

/// Per-defect Q values for a syndrome plus the greedy choice.
nlohmann::json inspect_q(const QNetwork& net, const Syndrome& syndrome);

struct ValidationRecord {
  std::uint64_t episodes = 0;
  std::uint64_t learning_steps = 0;
  double success_rate = 0.0;
  double mwpm_success_rate = 0.0;
  double mean_steps = 0.0;
  double wall_time_s = 0.0;
};

struct TrainSummary {
  TrainingCounters counters;
  std::vector<ValidationRecord> log;
  std::shared_ptr<const QNetwork> network;
};

/// Runs training episodes at config.error_rates[0] on config.distances[0]
/// until config.episodes have been played (counting episodes restored from a
/// checkpoint), validating every eval_every episodes on a fixed held-out set.
TrainSummary train(const RunConfig& config, const std::function<void(const ValidationRecord&)>& on_validation = {});

}  // namespace toric
