// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// shuffle-harness: runs one measurement against the reference engine and
// writes the result files (see export.h).

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "shuffle/core/text.h"
#include "shuffle/engine/engine.h"
#include "shuffle/harness/experiments.h"
#include "shuffle/harness/export.h"
#include "shuffle/loadgen/generator.h"
#include "shuffle/matcher/matcher.h"

namespace {

using namespace shuffle;
using namespace shuffle::harness;

constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitOverloaded = 3;

struct Overrides {
  std::optional<std::int64_t> records_per_second, record_size, num_consumers, state_size, output_ratio, instances,
      partitions;
  std::optional<double> total_selectivity, duration, warmup;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> matcher;

  void apply(BenchConfig& cfg) const {
    if (records_per_second) cfg.records_per_second = *records_per_second;
    if (record_size) cfg.record_size_bytes = *record_size;
    if (num_consumers) cfg.num_consumers = *num_consumers;
    if (state_size) cfg.state_size_bytes = *state_size;
    if (output_ratio) cfg.output_ratio = *output_ratio;
    if (instances) cfg.num_instances = *instances;
    if (partitions) cfg.input_partitions = cfg.output_partitions = *partitions;
    if (total_selectivity) cfg.total_selectivity = *total_selectivity;
    if (duration) cfg.duration = *duration;
    if (warmup) cfg.warmup = *warmup;
    if (seed) cfg.seed = *seed;
    if (matcher) cfg.matcher_mode = parse_matcher_mode(*matcher);
  }
};

struct Options {
  std::string config_file;
  Overrides overrides;
  int reps = 3;
  std::string out_dir;
  SearchSpec search;
  std::string strategy = "binary";
  std::uint32_t producers = 1;
  TimestampMs probe_interval_ms = 1000;
  int exporter_workers = 1;
  std::int64_t output_delay_ms = 0;
  bool quiet = false;

  std::optional<std::int64_t> overload_rate;
  std::string baseline;
  std::optional<std::int64_t> rate;
  bool strict = false;
  std::vector<std::int64_t> instance_counts{1, 2, 4};
  std::vector<std::int64_t> probe_loads;

  int partition = 0;
  std::string topic = "input";
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config_file, "JSON config file (BenchConfig field names)")->check(CLI::ExistingFile);
  auto& v = o.overrides;
  cmd->add_option("--records-per-second", v.records_per_second);
  cmd->add_option("--record-size", v.record_size, "payload bytes");
  cmd->add_option("--num-consumers", v.num_consumers);
  cmd->add_option("--total-selectivity", v.total_selectivity);
  cmd->add_option("--state-size", v.state_size, "bytes per consumer state, >= 40");
  cmd->add_option("--output-ratio", v.output_ratio, "emit one event per N matches of a consumer");
  cmd->add_option("--instances", v.instances);
  cmd->add_option("--partitions", v.partitions, "input and output partitions");
  cmd->add_option("--duration", v.duration, "seconds per trial");
  cmd->add_option("--warmup", v.warmup, "seconds discarded at the start of a trial");
  cmd->add_option("--seed", v.seed);
  cmd->add_option("--matcher", v.matcher, "sampled | exhaustive")->check(CLI::IsMember({"sampled", "exhaustive"}));
}

void add_run(CLI::App* cmd, Options& o) {
  add_common(cmd, o);
  cmd->add_option("--reps", o.reps)->check(CLI::PositiveNumber);
  cmd->add_option("--out", o.out_dir, "directory for result.json, summary.csv, latency_hist.csv");
  cmd->add_option("--producers", o.producers)->check(CLI::Range(1u, 1024u));
  cmd->add_option("--probe-interval-ms", o.probe_interval_ms)->check(CLI::Range(10, 60000));
  cmd->add_option("--exporter-workers", o.exporter_workers)->check(CLI::PositiveNumber);
  cmd->add_option("--output-delay-ms", o.output_delay_ms, "hold each output event back this long")
      ->check(CLI::NonNegativeNumber);
  cmd->add_flag("--quiet", o.quiet, "no per-trial progress on stderr");
}

void add_search(CLI::App* cmd, Options& o) {
  cmd->add_option("--rate-min", o.search.rate_min);
  cmd->add_option("--rate-max", o.search.rate_max);
  cmd->add_option("--strategy", o.strategy)->check(CLI::IsMember({"linear", "binary"}));
  cmd->add_option("--step", o.search.step, "linear step, records/s");
  cmd->add_option("--trials", o.search.trials, "binary midpoint probes");
  cmd->add_option("--trial-duration", o.search.trial_duration_s, "seconds; default --duration");
}

BenchConfig build_config(const Options& o) {
  BenchConfig cfg;
  bool mode_chosen = o.overrides.matcher.has_value();
  if (!o.config_file.empty()) {
    const auto j = read_config_json(o.config_file);
    mode_chosen = mode_chosen || (j.is_object() && j.contains("matcher_mode"));
    from_json(j, cfg);
  }
  o.overrides.apply(cfg);
  if (!mode_chosen) cfg.matcher_mode = default_matcher_mode(cfg.num_consumers);
  return validate_config(cfg);
}

// Four times the sustainable lower bound recorded in a previous result.
std::int64_t overload_from_baseline(const std::string& path) {
  const auto r = load_result(path);
  const auto it = r.aggregate.find("bracket_lo");
  if (it == r.aggregate.end() || it->second.median <= 0) {
    throw std::runtime_error(path + " holds no positive sustainable lower bound");
  }
  return 4 * std::llround(it->second.median);
}

void print_result(const RunResult& r) {
  std::cout << summary_csv(r);
  for (const auto& [name, a] : r.aggregate) {
    std::cout << "# " << name << " median=" << format_double(a.median) << " min=" << format_double(a.min)
              << " max=" << format_double(a.max) << '\n';
  }
  for (const auto& c : r.capacity) {
    std::cout << "# capacity instances=" << c.instances << " lo=" << c.bracket.lo
              << " hi=" << (c.bracket.hi ? std::to_string(*c.bracket.hi) : "inf") << '\n';
  }
  for (const auto& d : r.demand) {
    std::cout << "# demand load=" << d.load << " instances=" << (d.instances ? std::to_string(*d.instances) : "none")
              << '\n';
  }
}

int dump(const Options& o) {
  const BenchConfig cfg = build_config(o);
  auto clock = std::make_shared<SimulatedClock>();
  mlog::MessageLog log(clock);
  auto& input = log.create_topic("input", static_cast<int>(cfg.input_partitions));
  log.create_topic("output", static_cast<int>(cfg.output_partitions));
  const auto gen = loadgen::run_generator(loadgen::profile_for(cfg, o.producers), input, clock);
  if (gen.error) throw std::runtime_error("load generator: " + *gen.error);
  if (o.topic == "output") {
    auto rules = std::make_shared<const matcher::RuleSet>(matcher::rules_for(cfg));
    const auto report = engine::run_pipeline(cfg, log, rules, engine::StopCondition::drain());
    if (report.error) throw std::runtime_error("engine: " + *report.error);
  }
  const auto& topic = log.topic(o.topic);
  if (o.partition < 0 || o.partition >= static_cast<int>(topic.partition_count())) {
    throw std::invalid_argument("partition out of range");
  }
  mlog::dump_partition_csv(topic, static_cast<mlog::PartitionId>(o.partition), std::cout);
  return 0;
}

int run(const std::string& command, Options& o) {
  const BenchConfig cfg = build_config(o);
  o.search.strategy = parse_strategy(o.strategy);

  engine::EngineOptions eo;
  eo.output_delay_ms = o.output_delay_ms;
  LiveTrialRunner runner(engine_factory(eo));
  ExperimentOptions options;
  options.producers = o.producers;
  options.probe_interval_ms = o.probe_interval_ms;
  options.exporter_workers = o.exporter_workers;
  if (!o.quiet) options.progress = [](const std::string& line) { std::cerr << line << std::endl; };

  RunResult r;
  if (command == "adhoc") {
    std::int64_t rate = 0;
    if (o.overload_rate) {
      rate = *o.overload_rate;
    } else if (!o.baseline.empty()) {
      rate = overload_from_baseline(o.baseline);
    } else {
      rate = 4 * cfg.records_per_second;
    }
    r = run_adhoc(runner, cfg, rate, o.reps, options);
  } else if (command == "sustainable") {
    r = run_sustainable(runner, cfg, o.search, o.reps, options);
  } else if (command == "latency") {
    r = run_latency(runner, cfg, o.rate.value_or(cfg.records_per_second), o.reps, options);
  } else {
    r = run_scalability(runner, cfg, o.instance_counts, o.search, o.reps, o.probe_loads, options);
  }

  print_result(r);
  if (!o.out_dir.empty()) export_results(r, o.out_dir);
  if (!r.ok()) return kExitFailed;
  if (o.strict) {
    for (const auto& v : r.reps) {
      if (v.status == "overloaded") return kExitOverloaded;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Measure throughput and latency of the shuffle engine"};
  app.require_subcommand(1);
  Options o;

  auto* adhoc = app.add_subcommand("adhoc", "committed rate under overload");
  add_run(adhoc, o);
  adhoc->add_option("--overload-rate", o.overload_rate, "generation rate, records/s")->check(CLI::PositiveNumber);
  adhoc->add_option("--baseline", o.baseline, "sustainable result.json; overload at 4x its lower bound")
      ->check(CLI::ExistingFile);

  auto* sustainable = app.add_subcommand("sustainable", "bracket the sustainable throughput");
  add_run(sustainable, o);
  add_search(sustainable, o);

  auto* latency = app.add_subcommand("latency", "end-to-end latency quantiles at a fixed rate");
  add_run(latency, o);
  latency->add_option("--rate", o.rate, "records/s; default --records-per-second")->check(CLI::PositiveNumber);
  latency->add_flag("--strict", o.strict, "exit nonzero when a repetition is overloaded");

  auto* scalability = app.add_subcommand("scalability", "sustainable throughput per instance count");
  add_run(scalability, o);
  add_search(scalability, o);
  scalability->add_option("--instance-counts", o.instance_counts)->delimiter(',');
  scalability->add_option("--probe-loads", o.probe_loads, "loads for the resource-demand table")->delimiter(',');

  auto* dump_cmd = app.add_subcommand("dump", "print (offset, ts, payload hash) of one partition as CSV");
  add_common(dump_cmd, o);
  dump_cmd->add_option("--producers", o.producers)->check(CLI::Range(1u, 1024u));
  dump_cmd->add_option("--partition", o.partition);
  dump_cmd->add_option("--topic", o.topic)->check(CLI::IsMember({"input", "output"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (dump_cmd->parsed()) return dump(o);
    return run(app.get_subcommands().front()->get_name(), o);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailed;
  }
}
