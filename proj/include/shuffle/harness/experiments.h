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

// Measurement methods. Scalability is the sustainable search repeated per
// instance count.

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "shuffle/harness/result.h"
#include "shuffle/harness/trial.h"

namespace shuffle::harness {

struct ExperimentOptions {
  std::uint32_t producers = 1;
  TimestampMs probe_interval_ms = 1000;
  int exporter_workers = 1;
  std::size_t max_retained_bytes = std::size_t{512} << 20;
  metrics::GoalPredicate goal;                      // empty: lag-trend goal of the search spec
  std::function<void(const std::string&)> progress;  // one line per trial, optional
};

// Judges one trial at a rate. Used by search_bracket so the search itself is
// testable without running anything.
using TrialJudge = std::function<TrialRecord(std::int64_t rate)>;

struct SearchOutcome {
  Bracket bracket;
  std::vector<TrialRecord> trials;
};

// Binary: integer midpoints of [lo, hi) starting from (rate_min, rate_max),
// spec.trials probes. If no probe passed, rate_min is tested (failing gives
// [0, rate_min)); if none failed, rate_max is tested (passing gives
// [rate_max, inf)). Linear: rate_min, rate_min + step, ... up to rate_max,
// stopping at the first failure.
// The bracket's lo was observed sustained and hi observed unsustained.
SearchOutcome search_bracket(const SearchSpec& spec, const TrialJudge& judge);

// Smallest instance count whose capacity (bracket lo) reaches each load.
std::vector<DemandRow> resource_demand(const std::vector<CapacityPoint>& capacity,
                                       const std::vector<std::int64_t>& loads);

// count loads evenly spaced over [rate_min, rate_max].
std::vector<std::int64_t> default_probe_loads(const SearchSpec& spec, int count = 8);

// Generates at overload_rate for cfg.duration and reports the committed rate
// after warmup; the caller ensures the rate exceeds capacity.
RunResult run_adhoc(TrialRunner& runner, const BenchConfig& cfg, std::int64_t overload_rate, int reps,
                    const ExperimentOptions& options = {});

RunResult run_sustainable(TrialRunner& runner, const BenchConfig& cfg, const SearchSpec& spec, int reps = 1,
                          const ExperimentOptions& options = {});

// Latency at a fixed rate. Repetitions whose lag trend breaches the goal are
// marked "overloaded"; their quantiles are still reported.
RunResult run_latency(TrialRunner& runner, const BenchConfig& cfg, std::int64_t rate, int reps,
                      const ExperimentOptions& options = {}, metrics::SustainGoal goal = {});

// run_sustainable per instance count, plus the resource-demand table for
// probe_loads (default_probe_loads(spec) when empty).
RunResult run_scalability(TrialRunner& runner, const BenchConfig& cfg, const std::vector<std::int64_t>& instance_counts,
                          const SearchSpec& spec, int reps = 1, std::vector<std::int64_t> probe_loads = {},
                          const ExperimentOptions& options = {});

}  // namespace shuffle::harness
