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
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "toric/checkpoint.hpp"
#include "toric/encoding.hpp"
#include "toric/lattice.hpp"
#include "toric/network.hpp"
#include "toric/rng.hpp"

namespace toric {

enum class SyncUnit { LearningSteps, Episodes };

struct AgentConfig {
  double gamma = 0.95;
  double epsilon = 0.1;
  int batch_size = 32;
  int target_sync_period = 100;
  SyncUnit sync_unit = SyncUnit::LearningSteps;
  int max_steps = 50;
  double step_reward = -1.0;
  std::size_t buffer_capacity = 1'000'000;
  /// Train on all four quarter-turn rotations of each sampled transition.
  bool rotation_augmentation = true;
  /// When set, batch_size counts rows after augmentation (batch_size / 4
  /// transitions are drawn); otherwise batch_size transitions are drawn.
  bool batch_counts_rotations = false;

  void validate() const;
};

/// Replay tuple (P, a, r, O'). The successor observation is kept as the
/// successor syndrome; observation_of(next) recovers it. Empty `next` marks a
/// terminal transition.
struct Transition {
  Perspective perspective;
  int action = 0;
  double reward = -1.0;
  Syndrome next;
};

/// Fixed-capacity ring buffer; the oldest transition is overwritten first.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::uint64_t insertions() const { return insertions_; }
  bool empty() const { return items_.empty(); }

  /// i = 0 is the oldest retained transition.
  const Transition& at(std::size_t i) const;
  /// Uniform draw, with replacement across calls.
  const Transition& sample(Rng& rng) const;

 private:
  std::size_t capacity_;
  std::vector<Transition> items_;
  std::size_t head_ = 0;
  std::uint64_t insertions_ = 0;
};

using QMatrix = std::vector<std::array<double, 4>>;

/// Row i holds the network output for perspective i.
QMatrix q_values(const QNetwork& net, const Observation& obs);
QMatrix q_values(const QNetwork& net, const Observation& obs, Workspace& ws);

struct Choice {
  int perspective = 0;
  int action = 0;
  bool operator==(const Choice&) const = default;
};

/// Global argmax; ties go to the lowest perspective, then Up, Down, Right, Left.
Choice greedy_choice(const QMatrix& q);

/// epsilon-greedy: uniform over all (perspective, action) cells with
/// probability epsilon, greedy otherwise.
Choice select_action(const QMatrix& q, double epsilon, Rng& rng);
Choice select_action(const QNetwork& net, const Observation& obs, double epsilon, Rng& rng);

/// y_i = r_i + gamma * max over the successor observation's perspectives
/// and actions under `target_net`; y_i = r_i for terminal transitions.
std::vector<double> compute_targets(const QNetwork& target_net, std::span<const Transition> sample, double gamma);

/// Transition turned by `quarter_turns` clockwise quarter turns, with the
/// successor observation expanded and turned the same way.
struct RotatedTransition {
  Perspective perspective;
  int action = 0;
  double reward = 0.0;
  Observation next;
};
RotatedTransition rotate_transition(const Transition& t, int quarter_turns);

enum class EpisodeEnd { Solved, StepLimit };
enum class EpisodeMode { Train, Eval };

struct EpisodeResult {
  bool success = false;
  int steps = 0;
  EpisodeEnd end = EpisodeEnd::Solved;
  bool operator==(const EpisodeResult&) const = default;
};

/// Greedy decoding of one hidden state; the network is not modified.
EpisodeResult greedy_episode(const QNetwork& net, const HiddenState& initial, int max_steps, Workspace& ws);

/// The learning agent: policy network, target network, Adam state and replay
/// memory, all mutated only by this object's methods.
class Agent {
 public:
  Agent(QNetwork net, const AgentConfig& config, std::uint64_t seed);
  Agent(Checkpoint checkpoint, const AgentConfig& config, std::uint64_t seed);

  /// Plays one syndrome to the end. In training mode every move is stored and
  /// followed by one learning step; evaluation mode is greedy and read-only.
  EpisodeResult run_episode(const HiddenState& initial, EpisodeMode mode);

  /// One minibatch update from the replay memory. Returns the batch loss.
  double learning_step();

  void sync_target();

  const QNetwork& network() const { return net_; }
  const QNetwork& target_network() const { return target_; }
  const AdamState& optimizer() const { return opt_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  const TrainingCounters& counters() const { return counters_; }
  const AgentConfig& config() const { return config_; }
  std::uint64_t target_syncs() const { return syncs_; }

  void save(const std::string& path) const;

 private:
  AgentConfig config_;
  QNetwork net_;
  QNetwork target_;
  AdamState opt_;
  ReplayBuffer buffer_;
  TrainingCounters counters_;
  std::uint64_t syncs_ = 0;
  Rng rng_;
  Workspace ws_;
  ParameterSet grads_;
};

struct EvalReport {
  std::size_t episodes = 0;
  std::size_t successes = 0;
  double success_rate = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  double mean_steps = 0.0;
  std::vector<EpisodeResult> records;
};

/// Greedy episodes over a fixed dataset, optionally split over threads.
EvalReport evaluate(const QNetwork& net, std::span<const HiddenState> dataset, const AgentConfig& config,
                    int threads = 1);

}  // namespace toric
