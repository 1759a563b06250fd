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

#include "toric/harness.hpp"

#include <atomic>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "toric/dataset.hpp"
#include "toric/error.hpp"
#include "toric/stats.hpp"

namespace toric {

using nlohmann::json;

namespace {

const char* sync_unit_name(SyncUnit u) { return u == SyncUnit::Episodes ? "episodes" : "learning_steps"; }

SyncUnit parse_sync_unit(const std::string& s) {
  if (s == "episodes") return SyncUnit::Episodes;
  if (s == "learning_steps") return SyncUnit::LearningSteps;
  throw ConfigError("unknown sync unit '" + s + "' (expected learning_steps or episodes)");
}

const char* decoder_name(DecoderKind k) { return k == DecoderKind::Dqn ? "dqn" : "mwpm"; }

DecoderKind parse_decoder(const std::string& s) {
  if (s == "mwpm") return DecoderKind::Mwpm;
  if (s == "dqn") return DecoderKind::Dqn;
  throw ConfigError("unknown decoder '" + s + "' (expected mwpm or dqn)");
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw ConfigError("unknown config key '" + where + it.key() + "'");
  }
}

template <typename T>
void read_if(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

// Shortest representation that parses back to the same double.
std::string fmt(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

void RunConfig::validate() const {
  if (version != kRunConfigVersion) throw ConfigError("unsupported config version " + std::to_string(version));
  if (distances.empty()) throw ConfigError("at least one code distance is required");
  for (int d : distances) {
    if (d < 3 || d % 2 == 0) throw ConfigError("code distance must be odd and >= 3, got " + std::to_string(d));
  }
  if (error_rates.empty()) throw ConfigError("at least one error rate is required");
  for (double p : error_rates) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("error rate must lie in [0, 1]");
  }
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (matching.dp_max_defects < 0 || matching.dp_max_defects > 40) {
    throw ConfigError("matching.dp_max_defects must lie in [0, 40]");
  }
  if (eval_every == 0 || checkpoint_every == 0) throw ConfigError("eval_every and checkpoint_every must be positive");
  agent.validate();
}

json to_json(const RunConfig& c) {
  return json{
      {"version", c.version},
      {"distances", c.distances},
      {"error_rates", c.error_rates},
      {"samples", c.samples},
      {"seed", c.seed},
      {"decoder", decoder_name(c.decoder)},
      {"checkpoint", c.checkpoint},
      {"dataset", c.dataset},
      {"csv", c.csv_path},
      {"json", c.json_path},
      {"threads", c.threads},
      {"agent",
       {{"gamma", c.agent.gamma},
        {"epsilon", c.agent.epsilon},
        {"batch_size", c.agent.batch_size},
        {"target_sync_period", c.agent.target_sync_period},
        {"sync_unit", sync_unit_name(c.agent.sync_unit)},
        {"max_steps", c.agent.max_steps},
        {"step_reward", c.agent.step_reward},
        {"buffer_capacity", c.agent.buffer_capacity},
        {"rotation_augmentation", c.agent.rotation_augmentation},
        {"batch_counts_rotations", c.agent.batch_counts_rotations}}},
      {"matching", {{"dp_max_defects", c.matching.dp_max_defects}}},
      {"training",
       {{"episodes", c.episodes},
        {"eval_every", c.eval_every},
        {"validation_size", c.validation_size},
        {"validation_seed", c.validation_seed},
        {"checkpoint_every", c.checkpoint_every},
        {"log", c.log_path},
        {"resume", c.resume}}},
  };
}

RunConfig run_config_from_json(const json& doc, RunConfig c) {
  try {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown(doc,
                   {"version", "distances", "error_rates", "samples", "seed", "decoder", "checkpoint", "dataset",
                    "csv", "json", "threads", "agent", "matching", "training"},
                   "");
    read_if(doc, "version", c.version);
    read_if(doc, "distances", c.distances);
    read_if(doc, "error_rates", c.error_rates);
    read_if(doc, "samples", c.samples);
    read_if(doc, "seed", c.seed);
    if (doc.contains("decoder")) c.decoder = parse_decoder(doc.at("decoder").get<std::string>());
    read_if(doc, "checkpoint", c.checkpoint);
    read_if(doc, "dataset", c.dataset);
    read_if(doc, "csv", c.csv_path);
    read_if(doc, "json", c.json_path);
    read_if(doc, "threads", c.threads);
    if (doc.contains("agent")) {
      const json& a = doc.at("agent");
      reject_unknown(a,
                     {"gamma", "epsilon", "batch_size", "target_sync_period", "sync_unit", "max_steps", "step_reward",
                      "buffer_capacity", "rotation_augmentation", "batch_counts_rotations"},
                     "agent.");
      read_if(a, "gamma", c.agent.gamma);
      read_if(a, "epsilon", c.agent.epsilon);
      read_if(a, "batch_size", c.agent.batch_size);
      read_if(a, "target_sync_period", c.agent.target_sync_period);
      if (a.contains("sync_unit")) c.agent.sync_unit = parse_sync_unit(a.at("sync_unit").get<std::string>());
      read_if(a, "max_steps", c.agent.max_steps);
      read_if(a, "step_reward", c.agent.step_reward);
      read_if(a, "buffer_capacity", c.agent.buffer_capacity);
      read_if(a, "rotation_augmentation", c.agent.rotation_augmentation);
      read_if(a, "batch_counts_rotations", c.agent.batch_counts_rotations);
    }
    if (doc.contains("matching")) {
      const json& m = doc.at("matching");
      reject_unknown(m, {"dp_max_defects"}, "matching.");
      read_if(m, "dp_max_defects", c.matching.dp_max_defects);
    }
    if (doc.contains("training")) {
      const json& t = doc.at("training");
      reject_unknown(t,
                     {"episodes", "eval_every", "validation_size", "validation_seed", "checkpoint_every", "log",
                      "resume"},
                     "training.");
      read_if(t, "episodes", c.episodes);
      read_if(t, "eval_every", c.eval_every);
      read_if(t, "validation_size", c.validation_size);
      read_if(t, "validation_seed", c.validation_seed);
      read_if(t, "checkpoint_every", c.checkpoint_every);
      read_if(t, "log", c.log_path);
      read_if(t, "resume", c.resume);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config value: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file is not valid JSON: " + std::string(e.what()));
  }
  return run_config_from_json(doc, std::move(base));
}

Decoder mwpm_decoder(const MatchingOptions& options) {
  return [options](const HiddenState& s) {
    MwpmResult r = mwpm_decode(s, options);
    return DecodeOutcome{r.success, r.steps};
  };
}

Decoder dqn_decoder(std::shared_ptr<const QNetwork> net, int max_steps) {
  return [net = std::move(net), max_steps](const HiddenState& s) {
    thread_local Workspace ws;
    EpisodeResult r = greedy_episode(*net, s, max_steps, ws);
    return DecodeOutcome{r.success, r.steps};
  };
}

std::uint64_t point_seed(std::uint64_t master_seed, int d, double p) {
  return Rng::mix(master_seed ^ Rng::mix(static_cast<std::uint64_t>(d) * 0x100000001b3ULL ^
                                         std::bit_cast<std::uint64_t>(p)));
}

namespace {

struct ShardTally {
  std::uint64_t successes = 0;
  std::uint64_t steps = 0;
};

// Runs `body(shard)` for every shard on `threads` workers.
template <typename Body>
void for_each_shard(std::uint64_t shards, int threads, Body body) {
  const int workers = static_cast<int>(std::max<std::uint64_t>(1, std::min<std::uint64_t>(threads, shards)));
  if (workers <= 1) {
    for (std::uint64_t s = 0; s < shards; ++s) body(s);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      try {
        for (std::uint64_t s = next++; s < shards; s = next++) body(s);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

SweepPoint finish_point(int d, double p, std::uint64_t samples, std::uint64_t seed, const std::string& name,
                        const std::vector<ShardTally>& tallies, double wall) {
  SweepPoint pt;
  pt.d = d;
  pt.p = p;
  pt.samples = samples;
  std::uint64_t steps = 0;
  for (const auto& t : tallies) {
    pt.successes += t.successes;
    steps += t.steps;
  }
  pt.fails = samples - pt.successes;
  pt.success_rate = samples ? static_cast<double>(pt.successes) / samples : 1.0;
  pt.fail_rate = samples ? static_cast<double>(pt.fails) / samples : 0.0;
  const Interval ci = wilson_interval(pt.successes, samples);
  pt.ci_low = ci.low;
  pt.ci_high = ci.high;
  pt.mean_steps = samples ? static_cast<double>(steps) / samples : 0.0;
  pt.wall_time_s = wall;
  pt.seed = seed;
  pt.decoder = name;
  return pt;
}

}  // namespace

SweepPoint run_point(int d, double p, std::uint64_t samples, std::uint64_t seed, const Decoder& decoder,
                     const std::string& decoder_name, int threads) {
  const CodeDistance distance(d);
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("error rate must lie in [0, 1]");
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t shards = (samples + kShardSize - 1) / kShardSize;
  std::vector<ShardTally> tallies(shards);
  for_each_shard(shards, threads, [&](std::uint64_t shard) {
    Rng rng = Rng::stream(seed, shard);
    const HiddenState zero(distance);
    HiddenState state(distance);
    const std::uint64_t count = std::min(kShardSize, samples - shard * kShardSize);
    ShardTally tally;
    for (std::uint64_t i = 0; i < count; ++i) {
      state = zero;
      apply_iid_errors_inplace(state, p, rng);
      const DecodeOutcome out = decoder(state);
      tally.successes += out.success ? 1 : 0;
      tally.steps += static_cast<std::uint64_t>(out.steps);
    }
    tallies[shard] = tally;
  });
  return finish_point(d, p, samples, seed, decoder_name, tallies, seconds_since(start));
}

SweepPoint run_point(std::span<const HiddenState> states, double p, std::uint64_t seed, const Decoder& decoder,
                     const std::string& decoder_name, int threads) {
  if (states.empty()) return finish_point(0, p, 0, seed, decoder_name, {}, 0.0);
  const int d = states.front().distance();
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t samples = states.size();
  const std::uint64_t shards = (samples + kShardSize - 1) / kShardSize;
  std::vector<ShardTally> tallies(shards);
  for_each_shard(shards, threads, [&](std::uint64_t shard) {
    ShardTally tally;
    const std::uint64_t end = std::min(samples, (shard + 1) * kShardSize);
    for (std::uint64_t i = shard * kShardSize; i < end; ++i) {
      const DecodeOutcome out = decoder(states[i]);
      tally.successes += out.success ? 1 : 0;
      tally.steps += static_cast<std::uint64_t>(out.steps);
    }
    tallies[shard] = tally;
  });
  return finish_point(d, p, samples, seed, decoder_name, tallies, seconds_since(start));
}

SweepResult sweep(const RunConfig& config) {
  config.validate();
  SweepResult result;
  std::shared_ptr<const QNetwork> net;
  if (config.decoder == DecoderKind::Dqn) {
    if (config.checkpoint.empty()) throw ConfigError("the dqn decoder needs a checkpoint path");
    net = std::make_shared<const QNetwork>(load_checkpoint(config.checkpoint).network);
  }
  auto decoder_for = [&](int d) {
    if (config.decoder == DecoderKind::Mwpm) return mwpm_decoder(config.matching);
    if (net->architecture().d != d) {
      throw ConfigError("checkpoint is for d=" + std::to_string(net->architecture().d) + ", sweep asks for d=" +
                        std::to_string(d));
    }
    return dqn_decoder(net, config.agent.max_steps);
  };
  const std::string name = decoder_name(config.decoder);

  if (!config.dataset.empty()) {
    Dataset ds = read_dataset(config.dataset);
    result.points.push_back(run_point(ds.states, ds.p, ds.seed, decoder_for(ds.d), name, config.threads));
    return result;
  }
  for (int d : config.distances) {
    for (double p : config.error_rates) {
      const std::uint64_t seed = point_seed(config.seed, d, p);
      result.points.push_back(run_point(d, p, config.samples, seed, decoder_for(d), name, config.threads));
    }
  }
  return result;
}

std::string sweep_csv(const SweepResult& result) {
  std::ostringstream out;
  for (std::size_t i = 0; i < kSweepCsvColumns.size(); ++i) out << (i ? "," : "") << kSweepCsvColumns[i];
  out << "\n";
  for (const auto& p : result.points) {
    out << p.d << ',' << fmt(p.p) << ',' << p.samples << ',' << p.successes << ',' << p.fails << ','
        << fmt(p.success_rate) << ',' << fmt(p.fail_rate) << ',' << fmt(p.ci_low) << ',' << fmt(p.ci_high) << ','
        << fmt(p.mean_steps) << ',' << fmt(p.wall_time_s) << ',' << p.seed << ',' << p.decoder << "\n";
  }
  return out.str();
}

json sweep_json(const SweepResult& result) {
  json points = json::array();
  for (const auto& p : result.points) {
    points.push_back({{"d", p.d},
                      {"p", p.p},
                      {"samples", p.samples},
                      {"successes", p.successes},
                      {"fails", p.fails},
                      {"success_rate", p.success_rate},
                      {"fail_rate", p.fail_rate},
                      {"ci_low", p.ci_low},
                      {"ci_high", p.ci_high},
                      {"mean_steps", p.mean_steps},
                      {"wall_time_s", p.wall_time_s},
                      {"seed", p.seed},
                      {"decoder", p.decoder}});
  }
  return {{"points", points}};
}

int asymptotic_exponent(int d) { return (d + 1) / 2; }

double asymptotic_fail_rate(int d, double p) {
  if (d < 1) throw std::invalid_argument("distance must be positive");
  if (d % 2 == 1) {
    const int k = asymptotic_exponent(d);
    return 2.0 * d * binomial(d, k) * std::pow(p, k);
  }
  return d * binomial(d, d / 2) * std::pow(p, d / 2);
}

AsymptoticReport asymptotic_check(int d, const std::vector<double>& error_rates,
                                  const std::vector<std::uint64_t>& samples, std::uint64_t seed, int threads,
                                  const MatchingOptions& options) {
  if (error_rates.size() != samples.size()) throw std::invalid_argument("need one sample count per error rate");
  AsymptoticReport report;
  report.d = d;
  report.exponent = asymptotic_exponent(d);
  const Decoder decoder = mwpm_decoder(options);
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < error_rates.size(); ++i) {
    const double p = error_rates[i];
    const std::uint64_t s = point_seed(seed, d, p);
    SweepPoint pt = run_point(d, p, samples[i], s, decoder, "mwpm", threads);
    AsymptoticPoint ap;
    ap.p = p;
    ap.samples = pt.samples;
    ap.failures = pt.fails;
    ap.fail_rate = pt.fail_rate;
    ap.ci_low = 1.0 - pt.ci_high;
    ap.ci_high = 1.0 - pt.ci_low;
    ap.prediction = asymptotic_fail_rate(d, p);
    ap.ratio = ap.prediction > 0 ? ap.fail_rate / ap.prediction : 0.0;
    ap.seed = s;
    report.points.push_back(ap);
    if (ap.failures > 0 && p > 0) {
      lx.push_back(std::log(p));
      ly.push_back(std::log(ap.fail_rate));
    }
  }
  if (lx.size() >= 2) std::tie(report.slope, report.intercept) = linear_fit(lx, ly);
  if (!report.points.empty()) {
    auto smallest = std::min_element(report.points.begin(), report.points.end(),
                                     [](const auto& a, const auto& b) { return a.p < b.p; });
    report.ratio_at_smallest = smallest->ratio;
  }
  return report;
}

json asymptotic_json(const AsymptoticReport& r) {
  json points = json::array();
  for (const auto& p : r.points) {
    points.push_back({{"p", p.p},
                      {"samples", p.samples},
                      {"failures", p.failures},
                      {"fail_rate", p.fail_rate},
                      {"ci_low", p.ci_low},
                      {"ci_high", p.ci_high},
                      {"prediction", p.prediction},
                      {"ratio", p.ratio},
                      {"seed", p.seed}});
  }
  return {{"d", r.d},
          {"exponent", r.exponent},
          {"slope", r.slope},
          {"intercept", r.intercept},
          {"ratio_at_smallest", r.ratio_at_smallest},
          {"points", points}};
}

std::vector<Coord> parse_defects(const std::string& text) {
  std::vector<Coord> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    Coord c;
    char comma = 0;
    std::istringstream is(item);
    if (!(is >> c.row >> comma >> c.col) || comma != ',' || !(is >> std::ws).eof()) {
      throw ConfigError("cannot parse defect '" + item + "' (expected row,col)");
    }
    out.push_back(c);
  }
  return out;
}

json inspect_q(const QNetwork& net, const Syndrome& syndrome) {
  if (syndrome.distance() != net.architecture().d) {
    throw ConfigError("syndrome is for d=" + std::to_string(syndrome.distance()) + " but the checkpoint is for d=" +
                      std::to_string(net.architecture().d));
  }
  json defects = json::array();
  json out = {{"d", syndrome.distance()}};
  if (syndrome.empty()) {
    out["defects"] = defects;
    out["greedy"] = nullptr;
    out["max_q"] = nullptr;
    return out;
  }
  const QMatrix q = q_values(net, observation_of(syndrome));
  for (std::size_t i = 0; i < q.size(); ++i) {
    json values;
    for (Direction dir : kDirections) values[to_string(dir)] = q[i][static_cast<int>(dir)];
    defects.push_back({{"row", syndrome.defects()[i].row}, {"col", syndrome.defects()[i].col}, {"q", values}});
  }
  const Choice c = greedy_choice(q);
  out["defects"] = defects;
  out["greedy"] = {{"row", syndrome.defects()[c.perspective].row},
                   {"col", syndrome.defects()[c.perspective].col},
                   {"action", to_string(static_cast<Direction>(c.action))}};
  out["max_q"] = q[c.perspective][c.action];
  return out;
}

TrainSummary train(const RunConfig& config, const std::function<void(const ValidationRecord&)>& on_validation) {
  config.validate();
  const int d = config.distances.front();
  const double p = config.error_rates.front();
  const Architecture arch = Architecture::standard(CodeDistance(d));

  std::optional<Agent> agent;
  if (config.resume && !config.checkpoint.empty() && std::filesystem::exists(config.checkpoint)) {
    Checkpoint ck = load_checkpoint(config.checkpoint, arch);
    const std::uint64_t episodes = ck.counters.episodes;
    agent.emplace(std::move(ck), config.agent, Rng::stream(config.seed, 2 * episodes + 1).engine()());
  } else {
    Rng init = Rng::stream(config.seed, 0);
    agent.emplace(QNetwork::initialized(arch, init), config.agent, Rng::stream(config.seed, 1).engine()());
  }

  const std::vector<HiddenState> validation = sample_states(d, p, config.validation_seed, config.validation_size);
  const double mwpm_rate =
      run_point(validation, p, config.validation_seed, mwpm_decoder(config.matching), "mwpm", config.threads)
          .success_rate;

  std::ofstream log;
  if (!config.log_path.empty()) {
    const bool fresh = !std::filesystem::exists(config.log_path) || !config.resume;
    log.open(config.log_path, fresh ? std::ios::trunc : std::ios::app);
    if (!log) throw IoError("cannot open training log: " + config.log_path);
    if (fresh) log << "episodes,learning_steps,success_rate,mwpm_success_rate,mean_steps,wall_time_s\n";
  }

  TrainSummary summary;
  const auto start = std::chrono::steady_clock::now();
  const CodeDistance distance(d);
  const HiddenState zero(distance);
  // Episode e's syndrome comes from its own stream, so resumed runs see the
  // same syndrome sequence as uninterrupted ones.
  const std::uint64_t syndrome_seed = Rng::mix(config.seed ^ 0x5eed5eed5eed5eedULL);
  while (agent->counters().episodes < config.episodes) {
    const std::uint64_t e = agent->counters().episodes;
    Rng rng = Rng::stream(syndrome_seed, e);
    agent->run_episode(apply_iid_errors(zero, p, rng), EpisodeMode::Train);
    const std::uint64_t done = agent->counters().episodes;
    if (done % config.eval_every == 0 || done == config.episodes) {
      const EvalReport rep = evaluate(agent->network(), validation, config.agent, config.threads);
      ValidationRecord rec{done, agent->counters().learning_steps, rep.success_rate, mwpm_rate, rep.mean_steps,
                           seconds_since(start)};
      summary.log.push_back(rec);
      if (log.is_open()) {
        log << rec.episodes << ',' << rec.learning_steps << ',' << fmt(rec.success_rate) << ','
            << fmt(rec.mwpm_success_rate) << ',' << fmt(rec.mean_steps) << ',' << fmt(rec.wall_time_s) << "\n"
            << std::flush;
      }
      if (on_validation) on_validation(rec);
    }
    if (!config.checkpoint.empty() && (done % config.checkpoint_every == 0)) agent->save(config.checkpoint);
  }
  if (!config.checkpoint.empty()) agent->save(config.checkpoint);
  summary.counters = agent->counters();
  summary.network = std::make_shared<const QNetwork>(agent->network());
  return summary;
}

}  // namespace toric
