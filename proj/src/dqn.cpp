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

#include "toric/dqn.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <thread>

#include "toric/error.hpp"
#include "toric/stats.hpp"

namespace toric {

void AgentConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in [0, 1]");
  if (batch_size < 1) throw ConfigError("batch size must be positive");
  if (batch_counts_rotations && rotation_augmentation && batch_size % 4 != 0) {
    throw ConfigError("batch size must be a multiple of 4 when it counts rotated rows");
  }
  if (target_sync_period < 1) throw ConfigError("target sync period must be positive");
  if (max_steps < 1) throw ConfigError("max steps must be positive");
  if (buffer_capacity < 1) throw ConfigError("replay buffer capacity must be positive");
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay buffer capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
  } else {
    items_[head_] = std::move(t);
    head_ = (head_ + 1) % capacity_;
  }
  ++insertions_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= items_.size()) throw std::out_of_range("replay buffer index out of range");
  return items_[(head_ + i) % items_.size()];
}

const Transition& ReplayBuffer::sample(Rng& rng) const {
  if (items_.empty()) throw ContractViolation("sampling from an empty replay buffer");
  return items_[rng.below(items_.size())];
}

namespace {

std::vector<std::uint8_t> pack(const Observation& obs) {
  std::vector<std::uint8_t> cells;
  if (!obs.empty()) cells.reserve(obs.size() * obs[0].cells().size());
  for (const auto& p : obs) cells.insert(cells.end(), p.cells().begin(), p.cells().end());
  return cells;
}

Perspective rotate_times(Perspective p, int turns) {
  for (int i = 0; i < turns; ++i) p = rotate90(p);
  return p;
}

Direction rotate_times(Direction dir, int turns) {
  for (int i = 0; i < turns; ++i) dir = rotate90(dir);
  return dir;
}

// Max over all rows of a batch x 4 matrix segment.
double segment_max(const std::vector<double>& q, std::size_t first_row, std::size_t rows) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = first_row * 4; i < (first_row + rows) * 4; ++i) best = std::max(best, q[i]);
  return best;
}

std::vector<double> targets_for(const QNetwork& target_net, const std::vector<RotatedTransition>& rows, double gamma,
                                Workspace& ws) {
  std::vector<std::uint8_t> cells;
  std::size_t total = 0;
  for (const auto& r : rows) {
    for (const auto& p : r.next) cells.insert(cells.end(), p.cells().begin(), p.cells().end());
    total += r.next.size();
  }
  std::vector<double> q(total * 4);
  target_net.forward_batch(cells, static_cast<int>(total), q, ws);
  std::vector<double> y(rows.size());
  std::size_t offset = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    y[i] = rows[i].reward;
    if (!rows[i].next.empty()) y[i] += gamma * segment_max(q, offset, rows[i].next.size());
    offset += rows[i].next.size();
  }
  return y;
}

}  // namespace

QMatrix q_values(const QNetwork& net, const Observation& obs, Workspace& ws) {
  if (obs.empty()) throw ContractViolation("Q values requested for an empty observation");
  const auto cells = pack(obs);
  std::vector<double> flat(obs.size() * 4);
  net.forward_batch(cells, static_cast<int>(obs.size()), flat, ws);
  QMatrix out(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    for (int a = 0; a < 4; ++a) out[i][a] = flat[i * 4 + a];
  }
  return out;
}

QMatrix q_values(const QNetwork& net, const Observation& obs) {
  Workspace ws;
  return q_values(net, obs, ws);
}

Choice greedy_choice(const QMatrix& q) {
  if (q.empty()) throw ContractViolation("greedy choice over an empty Q matrix");
  Choice best{0, 0};
  for (std::size_t i = 0; i < q.size(); ++i) {
    for (int a = 0; a < 4; ++a) {
      if (q[i][a] > q[best.perspective][best.action]) best = {static_cast<int>(i), a};
    }
  }
  return best;
}

Choice select_action(const QMatrix& q, double epsilon, Rng& rng) {
  if (q.empty()) throw ContractViolation("action selection over an empty observation");
  if (epsilon > 0.0 && rng.uniform() < epsilon) {
    const auto cell = rng.below(q.size() * 4);
    return {static_cast<int>(cell / 4), static_cast<int>(cell % 4)};
  }
  return greedy_choice(q);
}

Choice select_action(const QNetwork& net, const Observation& obs, double epsilon, Rng& rng) {
  return select_action(q_values(net, obs), epsilon, rng);
}

RotatedTransition rotate_transition(const Transition& t, int quarter_turns) {
  RotatedTransition out{rotate_times(t.perspective, quarter_turns),
                        static_cast<int>(rotate_times(static_cast<Direction>(t.action), quarter_turns)), t.reward,
                        observation_of(t.next)};
  for (auto& p : out.next) p = rotate_times(std::move(p), quarter_turns);
  return out;
}

std::vector<double> compute_targets(const QNetwork& target_net, std::span<const Transition> sample, double gamma) {
  std::vector<RotatedTransition> rows;
  rows.reserve(sample.size());
  for (const auto& t : sample) rows.push_back(rotate_transition(t, 0));
  Workspace ws;
  return targets_for(target_net, rows, gamma, ws);
}

EpisodeResult greedy_episode(const QNetwork& net, const HiddenState& initial, int max_steps, Workspace& ws) {
  HiddenState state = initial;
  EpisodeResult result;
  while (true) {
    const Syndrome syndrome = compute_syndrome(state);
    if (syndrome.empty()) {
      result.success = !winding_parities(state).logical_failure();
      result.end = EpisodeEnd::Solved;
      return result;
    }
    if (result.steps >= max_steps) {
      result.success = false;
      result.end = EpisodeEnd::StepLimit;
      return result;
    }
    const Choice c = greedy_choice(q_values(net, observation_of(syndrome), ws));
    apply_action_inplace(state, {syndrome.defects()[c.perspective], static_cast<Direction>(c.action)});
    ++result.steps;
  }
}

Agent::Agent(QNetwork net, const AgentConfig& config, std::uint64_t seed)
    : config_(config),
      net_(std::move(net)),
      target_(net_),
      opt_(AdamState::for_architecture(net_.architecture())),
      buffer_(config.buffer_capacity),
      rng_(seed) {
  config_.validate();
}

Agent::Agent(Checkpoint checkpoint, const AgentConfig& config, std::uint64_t seed)
    : config_(config),
      net_(std::move(checkpoint.network)),
      target_(net_),
      opt_(std::move(checkpoint.optimizer)),
      buffer_(config.buffer_capacity),
      counters_(checkpoint.counters),
      rng_(seed) {
  config_.validate();
}

void Agent::sync_target() {
  target_ = net_;
  counters_.steps_since_sync = 0;
  ++syncs_;
}

double Agent::learning_step() {
  if (buffer_.empty()) throw ContractViolation("learning step with an empty replay buffer");
  const bool augment = config_.rotation_augmentation;
  int draws = config_.batch_size;
  if (augment && config_.batch_counts_rotations) draws /= 4;
  std::vector<RotatedTransition> rows;
  rows.reserve(static_cast<std::size_t>(draws) * (augment ? 4 : 1));
  for (int i = 0; i < draws; ++i) {
    const Transition& t = buffer_.sample(rng_);
    for (int turns = 0; turns < (augment ? 4 : 1); ++turns) rows.push_back(rotate_transition(t, turns));
  }
  const std::vector<double> y = targets_for(target_, rows, config_.gamma, ws_);
  std::vector<TrainingRow> batch(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) batch[i] = {rows[i].perspective.cells(), rows[i].action, y[i]};
  const double loss = gradients(net_, batch, grads_, ws_);
  adam_step(net_, grads_, opt_);

  ++counters_.learning_steps;
  if (config_.sync_unit == SyncUnit::LearningSteps) {
    if (++counters_.steps_since_sync >= static_cast<std::uint64_t>(config_.target_sync_period)) sync_target();
  }
  return loss;
}

EpisodeResult Agent::run_episode(const HiddenState& initial, EpisodeMode mode) {
  if (initial.distance() != net_.architecture().d) {
    throw std::invalid_argument("episode lattice size does not match the network");
  }
  if (mode == EpisodeMode::Eval) return greedy_episode(net_, initial, config_.max_steps, ws_);

  HiddenState state = initial;
  EpisodeResult result;
  Syndrome syndrome = compute_syndrome(state);
  while (true) {
    if (syndrome.empty()) {
      result.success = !winding_parities(state).logical_failure();
      result.end = EpisodeEnd::Solved;
      break;
    }
    if (result.steps >= config_.max_steps) {
      result.success = false;
      result.end = EpisodeEnd::StepLimit;
      break;
    }
    Observation obs = observation_of(syndrome);
    const Choice c = select_action(q_values(net_, obs, ws_), config_.epsilon, rng_);
    apply_action_inplace(state, {syndrome.defects()[c.perspective], static_cast<Direction>(c.action)});
    ++result.steps;
    Syndrome next = compute_syndrome(state);
    buffer_.push({std::move(obs[c.perspective]), c.action, config_.step_reward, next});
    learning_step();
    syndrome = std::move(next);
  }
  ++counters_.episodes;
  if (config_.sync_unit == SyncUnit::Episodes &&
      counters_.episodes % static_cast<std::uint64_t>(config_.target_sync_period) == 0) {
    sync_target();
  }
  return result;
}

void Agent::save(const std::string& path) const { save_checkpoint(path, net_, opt_, counters_); }

EvalReport evaluate(const QNetwork& net, std::span<const HiddenState> dataset, const AgentConfig& config,
                    int threads) {
  EvalReport report;
  report.episodes = dataset.size();
  report.records.resize(dataset.size());
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(dataset.size())));
  auto work = [&](int worker) {
    Workspace ws;
    for (std::size_t i = worker; i < dataset.size(); i += workers) {
      report.records[i] = greedy_episode(net, dataset[i], config.max_steps, ws);
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  double steps = 0.0;
  for (const auto& r : report.records) {
    report.successes += r.success ? 1 : 0;
    steps += r.steps;
  }
  if (!dataset.empty()) {
    report.success_rate = static_cast<double>(report.successes) / dataset.size();
    report.mean_steps = steps / dataset.size();
  } else {
    report.success_rate = 1.0;
  }
  const Interval ci = wilson_interval(report.successes, report.episodes);
  report.ci_low = ci.low;
  report.ci_high = ci.high;
  return report;
}

}  // namespace toric
