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

// Command-line front end: dataset generation, training, evaluation, sweeps,
// asymptotics and Q-value inspection.
//
// Settings come from the defaults, then --config, then explicit flags.
// Exit codes: 0 ok, 1 other failure, 2 bad configuration, 3 I/O, 4 contract
// violation.

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "toric/checkpoint.hpp"
#include "toric/dataset.hpp"
#include "toric/error.hpp"
#include "toric/harness.hpp"

namespace {

using nlohmann::json;
using toric::RunConfig;

enum Exit { kOk = 0, kOther = 1, kConfig = 2, kIo = 3, kContract = 4 };

// Flags bound to a scratch RunConfig; only flags given on the command line are
// copied over the config-file values.
class Flags {
 public:
  template <typename T>
  CLI::Option* add(CLI::App* app, const std::string& name, T RunConfig::*field, const std::string& help) {
    CLI::Option* opt = app->add_option(name, scratch_.*field, help);
    appliers_.push_back([opt, field, this](RunConfig& c) {
      if (opt->count() > 0) c.*field = scratch_.*field;
    });
    return opt;
  }

  template <typename T>
  void add_agent(CLI::App* app, const std::string& name, T toric::AgentConfig::*field, const std::string& help) {
    CLI::Option* opt = app->add_option(name, scratch_.agent.*field, help);
    appliers_.push_back([opt, field, this](RunConfig& c) {
      if (opt->count() > 0) c.agent.*field = scratch_.agent.*field;
    });
  }

  RunConfig resolve(const std::string& config_path) const {
    RunConfig c = config_path.empty() ? RunConfig{} : toric::load_run_config(config_path);
    for (const auto& apply : appliers_) apply(c);
    return c;
  }

  RunConfig& scratch() { return scratch_; }
  std::vector<std::function<void(RunConfig&)>>& appliers() { return appliers_; }

 private:
  RunConfig scratch_;
  std::vector<std::function<void(RunConfig&)>> appliers_;
};

void add_common(CLI::App* app, Flags& f, std::string& config_path) {
  app->add_option("--config", config_path, "JSON run config (see README)");
  f.add(app, "-d,--distance", &RunConfig::distances, "code distances");
  f.add(app, "-p,--error-rate", &RunConfig::error_rates, "bit-flip error rates");
  f.add(app, "--seed", &RunConfig::seed, "master seed");
  f.add(app, "--threads", &RunConfig::threads, "worker threads");
}

void add_agent_flags(CLI::App* app, Flags& f) {
  f.add_agent(app, "--gamma", &toric::AgentConfig::gamma, "discount factor");
  f.add_agent(app, "--epsilon", &toric::AgentConfig::epsilon, "exploration probability");
  f.add_agent(app, "--batch-size", &toric::AgentConfig::batch_size, "sampled transitions per learning step");
  f.add_agent(app, "--target-sync", &toric::AgentConfig::target_sync_period, "target network sync period");
  f.add_agent(app, "--max-steps", &toric::AgentConfig::max_steps, "step limit per episode");
  f.add_agent(app, "--step-reward", &toric::AgentConfig::step_reward, "reward per move");
  f.add_agent(app, "--buffer-capacity", &toric::AgentConfig::buffer_capacity, "replay memory size");
  f.add_agent(app, "--rotations", &toric::AgentConfig::rotation_augmentation, "train on all four rotations");
  f.add_agent(app, "--batch-counts-rotations", &toric::AgentConfig::batch_counts_rotations,
              "batch size counts rotated rows");
  auto* unit = app->add_option("--sync-unit", "learning_steps | episodes")
                   ->check(CLI::IsMember({"learning_steps", "episodes"}));
  f.appliers().push_back([unit](RunConfig& c) {
    if (unit->count() > 0) {
      c.agent.sync_unit =
          unit->as<std::string>() == "episodes" ? toric::SyncUnit::Episodes : toric::SyncUnit::LearningSteps;
    }
  });
}

void add_dp_flag(CLI::App* app, Flags& f) {
  auto* opt = app->add_option("--dp-max-defects", f.scratch().matching.dp_max_defects,
                              "largest defect count matched by subset DP");
  f.appliers().push_back([opt, &f](RunConfig& c) {
    if (opt->count() > 0) c.matching.dp_max_defects = f.scratch().matching.dp_max_defects;
  });
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw toric::IoError("cannot open output file: " + path);
  out << text;
  if (!out) throw toric::IoError("failed writing: " + path);
}

void emit(const RunConfig& c, const std::string& csv, const json& doc) {
  if (!c.csv_path.empty()) write_text(c.csv_path, csv);
  if (!c.json_path.empty()) write_text(c.json_path, doc.dump(2) + "\n");
  if (c.csv_path.empty() && c.json_path.empty()) std::cout << csv;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Toric-code bit-flip decoding: MWPM reference and deep Q-learning agent"};
  app.require_subcommand(1);
  Flags flags;
  std::string config_path;

  // generate
  auto* gen = app.add_subcommand("generate", "write a file of sampled error configurations");
  std::string gen_out;
  add_common(gen, flags, config_path);
  flags.add(gen, "-n,--samples", &RunConfig::samples, "number of error configurations");
  gen->add_option("-o,--output", gen_out, "dataset path")->required();

  // train
  auto* tr = app.add_subcommand("train", "train a DQN agent, logging validation success rates");
  add_common(tr, flags, config_path);
  add_agent_flags(tr, flags);
  add_dp_flag(tr, flags);
  flags.add(tr, "--episodes", &RunConfig::episodes, "total training episodes");
  flags.add(tr, "--eval-every", &RunConfig::eval_every, "episodes between validations");
  flags.add(tr, "--validation-size", &RunConfig::validation_size, "held-out syndromes");
  flags.add(tr, "--validation-seed", &RunConfig::validation_seed, "seed of the held-out set");
  flags.add(tr, "--checkpoint-every", &RunConfig::checkpoint_every, "episodes between checkpoints");
  flags.add(tr, "--checkpoint", &RunConfig::checkpoint, "checkpoint path");
  flags.add(tr, "--log", &RunConfig::log_path, "convergence CSV path");
  flags.add(tr, "--resume", &RunConfig::resume, "continue from an existing checkpoint");

  // evaluate / sweep share a flag set
  auto* ev = app.add_subcommand("evaluate", "decode a dataset file with MWPM or a trained agent");
  auto* sw = app.add_subcommand("sweep", "Monte Carlo success rates over a (d, p) grid");
  std::string decoder_flag;
  for (auto* sub : {ev, sw}) {
    add_common(sub, flags, config_path);
    add_dp_flag(sub, flags);
    flags.add(sub, "--checkpoint", &RunConfig::checkpoint, "trained agent checkpoint");
    flags.add(sub, "--csv", &RunConfig::csv_path, "CSV output path");
    flags.add(sub, "--json", &RunConfig::json_path, "JSON output path");
    flags.add_agent(sub, "--max-steps", &toric::AgentConfig::max_steps, "step limit per agent episode");
    auto* dec = sub->add_option("--decoder", decoder_flag, "mwpm | dqn")->check(CLI::IsMember({"mwpm", "dqn"}));
    flags.appliers().push_back([dec, &decoder_flag](RunConfig& c) {
      if (dec->count() > 0) c.decoder = decoder_flag == "dqn" ? toric::DecoderKind::Dqn : toric::DecoderKind::Mwpm;
    });
  }
  flags.add(ev, "--dataset", &RunConfig::dataset, "dataset file")->required();
  flags.add(sw, "-n,--samples", &RunConfig::samples, "samples per point");

  // asymptotics
  auto* as = app.add_subcommand("asymptotics", "compare MWPM low-p failure rates with the leading-order formula");
  std::vector<std::uint64_t> as_samples;
  std::string as_json;
  add_common(as, flags, config_path);
  add_dp_flag(as, flags);
  as->add_option("-n,--samples", as_samples, "samples per error rate (one value, or one per rate)");
  as->add_option("--json", as_json, "JSON output path (default stdout)");

  // inspect-q
  auto* iq = app.add_subcommand("inspect-q", "print per-defect Q values of a trained agent");
  std::string iq_ckpt, iq_defects;
  iq->add_option("--checkpoint", iq_ckpt, "trained agent checkpoint")->required();
  iq->add_option("--defects", iq_defects, "defect list \"r,c;r,c;...\"");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*iq) {
      toric::Checkpoint ck = toric::load_checkpoint(iq_ckpt);
      const toric::Syndrome s(ck.network.architecture().d, toric::parse_defects(iq_defects));
      std::cout << toric::inspect_q(ck.network, s).dump(2) << "\n";
      return kOk;
    }

    RunConfig c = flags.resolve(config_path);
    c.validate();

    if (*gen) {
      const auto ds = toric::generate_dataset(c.distances.front(), c.error_rates.front(), c.samples, c.seed, gen_out);
      std::cerr << "wrote " << ds.states.size() << " states to " << gen_out << "\n";
    } else if (*tr) {
      const auto summary = toric::train(c, [](const toric::ValidationRecord& r) {
        std::cerr << "episodes " << r.episodes << "  success " << r.success_rate << "  mwpm "
                  << r.mwpm_success_rate << "  mean steps " << r.mean_steps << "\n";
      });
      json out = {{"episodes", summary.counters.episodes},
                  {"learning_steps", summary.counters.learning_steps},
                  {"config", toric::to_json(c)}};
      if (!summary.log.empty()) out["final_success_rate"] = summary.log.back().success_rate;
      std::cout << out.dump(2) << "\n";
    } else if (*ev || *sw) {
      if (*sw) c.dataset.clear();
      const toric::SweepResult r = toric::sweep(c);
      json doc = toric::sweep_json(r);
      doc["config"] = toric::to_json(c);
      emit(c, toric::sweep_csv(r), doc);
    } else if (*as) {
      std::vector<std::uint64_t> samples = as_samples;
      if (samples.empty()) samples = {c.samples};
      if (samples.size() == 1) samples.assign(c.error_rates.size(), samples.front());
      if (samples.size() != c.error_rates.size()) throw toric::ConfigError("need one sample count per error rate");
      json reports = json::array();
      for (int d : c.distances) {
        reports.push_back(
            toric::asymptotic_json(toric::asymptotic_check(d, c.error_rates, samples, c.seed, c.threads, c.matching)));
      }
      write_text(as_json, reports.dump(2) + "\n");
    }
    return kOk;
  } catch (const toric::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const toric::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const toric::CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << "\n";
    return e.kind() == toric::CheckpointError::Kind::Shape ? kConfig : kIo;
  } catch (const toric::ContractViolation& e) {
    std::cerr << "contract violation: " << e.what() << "\n";
    return kContract;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOther;
  }
}
