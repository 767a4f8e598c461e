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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Runtime limits are part of each criterion.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "shuffle/engine/engine.h"
#include "shuffle/harness/experiments.h"
#include "shuffle/harness/systems.h"
#include "shuffle/harness/trial.h"
#include "shuffle/loadgen/generator.h"
#include "shuffle/matcher/matcher.h"
#include "shuffle/metrics/throughput.h"

namespace {

using namespace shuffle;
using namespace shuffle::harness;

struct Verdict {
  bool pass = false;
  std::string detail;
};

// Upper 1% points of chi-square, frozen from tests/oracle/oracle.py.
constexpr double kChi2Df3Alpha01 = 11.3449;

std::string fmt(double v, int digits = 1) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::uint64_t payload_hash(std::uint32_t producer, std::uint64_t index, std::size_t size = 64) {
  return matcher::record_hash(loadgen::gen_payload(Seed{42}, producer, index, size));
}

Verdict selectivity_law() {
  const auto sampled = matcher::build_rules(100'000, 0.2, SelectivityDistribution::Uniform, Seed{5});
  std::vector<matcher::ConsumerId> ids;
  std::uint64_t matches = 0;
  constexpr std::uint64_t kRecords = 100'000;
  for (std::uint64_t i = 0; i < kRecords; ++i) {
    matcher::match_into(payload_hash(0, i), sampled, ids);
    matches += ids.size();
  }
  const double mean = static_cast<double>(matches) / kRecords;

  // Two-sample homogeneity test of match-set sizes {0, 1, 2, >=3} at n = 100,
  // each matcher over its own independent payload stream.
  const auto ex = matcher::build_rules(100, 0.2, SelectivityDistribution::Uniform, Seed{5}, MatcherMode::Exhaustive);
  const auto sa = matcher::build_rules(100, 0.2, SelectivityDistribution::Uniform, Seed{5}, MatcherMode::Sampled);
  std::array<std::array<double, 4>, 2> table{};
  for (std::uint64_t i = 0; i < kRecords; ++i) {
    matcher::match_into(payload_hash(1, i), ex, ids);
    table[0][std::min<std::size_t>(ids.size(), 3)] += 1;
    matcher::match_into(payload_hash(2, i), sa, ids);
    table[1][std::min<std::size_t>(ids.size(), 3)] += 1;
  }
  double chi2 = 0;
  for (int k = 0; k < 4; ++k) {
    const double col = table[0][k] + table[1][k];
    for (int r = 0; r < 2; ++r) {
      const double expected = col / 2.0;  // equal sample sizes
      chi2 += (table[r][k] - expected) * (table[r][k] - expected) / expected;
    }
  }
  return {std::abs(mean - 0.2) <= 0.005 && chi2 < kChi2Df3Alpha01,
          "mean matches/record " + fmt(mean, 5) + " (0.2 +- 0.005), size chi2 " + fmt(chi2, 3) + " < " +
              fmt(kChi2Df3Alpha01, 4)};
}

// A log whose input topic holds records payloads, one per simulated ms.
struct FilledLog {
  FilledLog(const BenchConfig& cfg, std::uint64_t records) : log(clock) {
    auto& in = log.create_topic("input", static_cast<int>(cfg.input_partitions));
    log.create_topic("output", static_cast<int>(cfg.output_partitions));
    std::vector<std::byte> buf(static_cast<std::size_t>(cfg.record_size_bytes));
    for (std::uint64_t i = 0; i < records; ++i) {
      clock->advance_to(clock->now_ms() + 1);
      loadgen::fill_payload(buf, cfg.root_seed(), 0, i);
      in.append(std::nullopt, buf);
    }
  }
  std::shared_ptr<SimulatedClock> clock = std::make_shared<SimulatedClock>(1'000'000);
  mlog::MessageLog log;
};

BenchConfig drain_cfg(std::int64_t instances, std::int64_t partitions) {
  BenchConfig cfg;
  cfg.num_consumers = 1000;
  cfg.total_selectivity = 0.2;
  cfg.output_ratio = 10;
  cfg.record_size_bytes = 256;
  cfg.num_instances = instances;
  cfg.input_partitions = partitions;
  cfg.output_partitions = partitions;
  cfg.seed = 11;
  return cfg;
}

engine::EngineReport drain(const BenchConfig& cfg, mlog::MessageLog& log) {
  auto rules = std::make_shared<const matcher::RuleSet>(matcher::rules_for(cfg));
  return engine::run_pipeline(cfg, log, rules, engine::StopCondition::drain(), {}, true);
}

Verdict conservation_at(std::int64_t consumers) {
  auto cfg = drain_cfg(4, 4);
  cfg.num_consumers = consumers;
  FilledLog f(cfg, 10'000);
  const auto report = drain(cfg, f.log);
  if (report.error || !report.final_states) return {false, "engine failed: " + report.error.value_or("no snapshot")};
  std::uint64_t count_sum = 0, expected_events = 0;
  for (const auto& [key, s] : *report.final_states) {
    count_sum += s.count;
    expected_events += s.count / 10;
  }
  const auto t = report.totals();
  const auto output_end = static_cast<std::uint64_t>(f.log.topic("output").end_total());
  return {t.records_polled == 10'000 && count_sum == t.matches_emitted && t.events_written == expected_events &&
              output_end == t.events_written,
          "n=" + std::to_string(consumers) + ": sum(count) " + std::to_string(count_sum) + " == matches " +
              std::to_string(t.matches_emitted) + ", events " + std::to_string(t.events_written) +
              " == sum(floor(count/10)) " + std::to_string(expected_events)};
}

// The prescribed n = 1000 leaves every count below m, so n = 100 is run as
// well to exercise the event side of the law.
Verdict conservation() {
  const auto a = conservation_at(1000), b = conservation_at(100);
  return {a.pass && b.pass, a.detail + "; " + b.detail};
}

Verdict parallelism_independence() {
  FilledLog one(drain_cfg(1, 9), 20'000), nine(drain_cfg(9, 9), 20'000);
  const auto a = drain(drain_cfg(1, 9), one.log);
  const auto b = drain(drain_cfg(9, 9), nine.log);
  if (a.error || b.error) return {false, "engine failed: " + a.error.value_or(b.error.value_or(""))};
  return {*a.final_states == *b.final_states && !a.final_states->empty(),
          std::to_string(a.final_states->size()) + " consumer states, 1 vs 9 instances " +
              (*a.final_states == *b.final_states ? "identical" : "differ")};
}

Verdict latency_instrument() {
  engine::EngineOptions eo;
  eo.output_delay_ms = 25;
  LiveTrialRunner runner(engine_factory(eo));
  BenchConfig cfg;
  cfg.num_consumers = 10'000;
  cfg.record_size_bytes = 256;
  cfg.output_ratio = 1;
  cfg.num_instances = 4;
  cfg.input_partitions = cfg.output_partitions = 4;
  cfg.duration = 15;
  cfg.warmup = 3;
  const auto r = run_latency(runner, cfg, 10'000, 1);
  const auto& v = r.reps.at(0);
  if (!v.latency) return {false, v.status};
  const auto p50 = v.latency->p50.ms;
  const bool conserved = r.histogram && r.histogram->total() == v.events_written;
  return {v.status == "ok" && !v.latency->p50.overflow && p50 >= 25 && p50 <= 40 && conserved,
          "p50 " + v.latency->p50.to_string() + " ms in [25, 40], p99 " + v.latency->p99.to_string() +
              " ms, histogram total " + std::to_string(r.histogram ? r.histogram->total() : 0) + " vs events " +
              std::to_string(v.events_written) + ", status " + v.status};
}

Verdict sustainable_search() {
  LiveTrialRunner runner(throttled_mock_factory([](const BenchConfig&) { return 7000.0; }));
  BenchConfig cfg;
  cfg.record_size_bytes = 128;
  cfg.duration = 30;
  cfg.warmup = 5;
  SearchSpec spec;
  spec.rate_min = 1000;
  spec.rate_max = 16000;
  spec.trials = 4;
  const auto r = run_sustainable(runner, cfg, spec, 1);
  const auto& b = *r.reps.at(0).bracket;
  const std::string hi = b.hi ? std::to_string(*b.hi) : "inf";
  return {b.contains(7000) && b.width() && *b.width() <= 1000,
          "bracket [" + std::to_string(b.lo) + ", " + hi + ") over " + std::to_string(r.trials.size()) + " trials"};
}

// Baseline config scaled to the desk: n = 1e5, 1 KiB records, 4 instances.
BenchConfig scaled_baseline() {
  BenchConfig cfg;
  cfg.num_consumers = 100'000;
  cfg.record_size_bytes = 1024;
  cfg.num_instances = 4;
  cfg.input_partitions = cfg.output_partitions = 4;
  cfg.duration = 10;
  cfg.warmup = 2;
  return cfg;
}

ExperimentOptions fast_probes() {
  ExperimentOptions o;
  o.probe_interval_ms = 500;
  return o;
}

Verdict adhoc_vs_sustainable() {
  LiveTrialRunner runner(engine_factory());
  const auto cfg = scaled_baseline();
  SearchSpec spec;
  spec.rate_min = 100'000;
  spec.rate_max = 8'000'000;
  spec.trials = 6;
  const auto sus = run_sustainable(runner, cfg, spec, 1, fast_probes());
  const auto lo = sus.reps.at(0).bracket->lo;
  if (lo <= 0) return {false, "no sustained rate found, bracket lo 0"};
  const auto adhoc = run_adhoc(runner, cfg, 4 * lo, 1, fast_probes());
  const auto& v = adhoc.reps.at(0);
  if (!v.rate) return {false, "ad-hoc run failed: " + v.status};
  return {*v.rate >= static_cast<double>(lo),
          "ad-hoc " + fmt(*v.rate, 0) + " rec/s at overload " + std::to_string(4 * lo) + " >= sustainable lo " +
              std::to_string(lo)};
}

Verdict throughput_floor() {
  LiveTrialRunner runner(engine_factory());
  TrialSpec spec;
  spec.cfg = scaled_baseline();
  spec.cfg.records_per_second = 50'000;
  spec.cfg.duration = 30;
  spec.cfg.warmup = 5;
  const auto o = runner.run(spec);
  if (o.error) return {false, "trial failed: " + *o.error};
  const double slope = metrics::lag_trend(o.lag, spec.cfg.warmup);
  const bool sustained = o.load_delivered() && metrics::is_sustained(o.lag, 50'000, spec.cfg.warmup);
  return {sustained, "50000 rec/s " + std::string(sustained ? "sustained" : "not sustained") + ", lag slope " +
                         fmt(slope) + " rec/s, " + std::to_string(o.records_sent) + "/" +
                         std::to_string(o.records_scheduled) + " records sent"};
}

Verdict record_size_monotonicity() {
  LiveTrialRunner runner(engine_factory());
  auto cfg = scaled_baseline();
  std::map<std::int64_t, double> rate;
  for (std::int64_t size : {128, 1024}) {
    cfg.record_size_bytes = size;
    const auto r = run_adhoc(runner, cfg, 8'000'000, 1, fast_probes());
    if (!r.reps.at(0).rate) return {false, std::to_string(size) + " B run failed: " + r.reps.at(0).status};
    rate[size] = *r.reps.at(0).rate;
  }
  return {rate[128] >= rate[1024],
          "ad-hoc 128 B " + fmt(rate[128], 0) + " rec/s >= 1024 B " + fmt(rate[1024], 0) + " rec/s"};
}

struct DeterminismRun {
  std::vector<std::uint64_t> payload_hashes;
  std::vector<std::pair<std::uint64_t, std::vector<matcher::ConsumerId>>> assignments;
  engine::StateSnapshot states;
  std::optional<std::string> error;
};

DeterminismRun determinism_run() {
  auto cfg = drain_cfg(4, 4);
  cfg.records_per_second = 10'000;
  cfg.duration = 2;
  cfg.warmup = 0;
  auto clock = std::make_shared<SimulatedClock>();
  mlog::MessageLog log(clock);
  auto& in = log.create_topic("input", 4);
  log.create_topic("output", 4);
  DeterminismRun run;
  const auto gen = loadgen::run_generator(loadgen::profile_for(cfg, 1), in, clock);
  if (gen.error) run.error = gen.error;

  const auto rules = matcher::rules_for(cfg);
  std::vector<matcher::ConsumerId> ids;
  for (mlog::PartitionId p = 0; p < in.partition_count(); ++p) {
    for (const auto& r : in.read(p, 0, 1u << 30)) {
      const auto h = matcher::record_hash(r.payload);
      run.payload_hashes.push_back(h);
      matcher::match_into(h, rules, ids);
      run.assignments.emplace_back(h, ids);
    }
  }
  std::sort(run.payload_hashes.begin(), run.payload_hashes.end());
  std::sort(run.assignments.begin(), run.assignments.end());
  const auto report = drain(cfg, log);
  if (report.error) run.error = report.error;
  if (report.final_states) run.states = *report.final_states;
  return run;
}

Verdict determinism() {
  const auto a = determinism_run(), b = determinism_run();
  if (a.error || b.error) return {false, "run failed: " + a.error.value_or(b.error.value_or(""))};
  const bool payloads = a.payload_hashes == b.payload_hashes && a.payload_hashes.size() == 20'000;
  const bool matches = a.assignments == b.assignments;
  const bool states = a.states == b.states && !a.states.empty();
  return {payloads && matches && states, std::to_string(a.payload_hashes.size()) + " payloads " +
                                             (payloads ? "identical" : "differ") + ", assignments " +
                                             (matches ? "identical" : "differ") + ", " +
                                             std::to_string(a.states.size()) + " states " +
                                             (states ? "identical" : "differ")};
}

struct Criterion {
  const char* name;
  double limit_s;  // 0: no runtime bound
  std::function<Verdict()> check;
};

}  // namespace

// Optional arguments select criteria by name.
int main(int argc, char** argv) {
  const std::vector<std::string> only(argv + 1, argv + argc);
  const std::vector<Criterion> criteria{
      {"selectivity_law", 30, selectivity_law},
      {"conservation", 10, conservation},
      {"parallelism_independence", 30, parallelism_independence},
      {"latency_instrument", 60, latency_instrument},
      {"sustainable_search", 300, sustainable_search},
      {"adhoc_ge_sustainable", 0, adhoc_vs_sustainable},
      {"throughput_floor", 120, throughput_floor},
      {"record_size_monotonicity", 0, record_size_monotonicity},
      {"determinism", 0, determinism},
  };
  int failed = 0, ran = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.name) == only.end()) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.limit_s <= 0 || secs < c.limit_s;
    const bool pass = v.pass && in_time;
    failed += pass ? 0 : 1;
    std::printf("%s %s: %s; %ss%s\n", pass ? "PASS" : "FAIL", c.name, v.detail.c_str(), fmt(secs).c_str(),
                in_time ? "" : (" exceeds " + fmt(c.limit_s, 0) + " s limit").c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
