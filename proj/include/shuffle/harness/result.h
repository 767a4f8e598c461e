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

// What an experiment reports, and its JSON form (result.json).

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "shuffle/core/config.h"
#include "shuffle/harness/aggregation.h"
#include "shuffle/metrics/histogram.h"
#include "shuffle/metrics/throughput.h"

namespace shuffle::harness {

enum class ResultKind { AdHoc, Sustainable, Latency, Scalability };
std::string_view to_string(ResultKind k);  // "adhoc", "sustainable", "latency", "scalability"
ResultKind parse_result_kind(std::string_view s);

enum class SearchStrategy { Linear, Binary };
std::string_view to_string(SearchStrategy s);  // "linear", "binary"
SearchStrategy parse_strategy(std::string_view s);

struct SearchSpec {
  std::int64_t rate_min = 1000;
  std::int64_t rate_max = 100000;
  SearchStrategy strategy = SearchStrategy::Binary;
  std::int64_t step = 1000;        // Linear
  int trials = 6;                  // Binary: midpoint probes
  double trial_duration_s = 0.0;   // 0: cfg.duration
  double warmup_s = -1.0;          // < 0: cfg.warmup
  metrics::SustainGoal goal;

  // Throws std::invalid_argument on rate_min >= rate_max, rate_min < 1,
  // step < 1 (Linear) or trials < 1 (Binary).
  void validate() const;
  bool operator==(const SearchSpec&) const = default;
};

// [lo, hi) in records/s; hi absent means unbounded (rate_max sustained).
struct Bracket {
  std::int64_t lo = 0;
  std::optional<std::int64_t> hi;

  bool contains(double rate) const { return rate >= static_cast<double>(lo) && (!hi || rate < static_cast<double>(*hi)); }
  std::optional<std::int64_t> width() const {
    if (!hi) return std::nullopt;
    return *hi - lo;
  }
  bool operator==(const Bracket&) const = default;
};

struct LatencyQuantiles {
  metrics::LatencyValue p50, p95, p99;
  std::uint64_t total = 0;
  bool operator==(const LatencyQuantiles&) const = default;
};

// One independent run at a fixed rate.
struct TrialRecord {
  int rep = 0;
  std::int64_t instances = 0;
  std::int64_t rate = 0;
  bool sustained = false;
  std::optional<double> lag_slope;
  std::optional<double> committed_rate;
  std::uint64_t records_sent = 0;
  std::uint64_t records_scheduled = 0;
  std::optional<std::string> error;
  bool operator==(const TrialRecord&) const = default;
};

// One row of summary.csv.
struct RepValue {
  int rep = 0;
  std::int64_t instances = 0;
  std::optional<double> rate;            // AdHoc: measured; Latency: generated
  std::optional<Bracket> bracket;        // Sustainable, Scalability
  std::optional<LatencyQuantiles> latency;
  std::uint64_t events_written = 0;      // Latency: cross-check against the histogram total
  std::string status = "ok";             // ok | overloaded | error: <message>
  bool operator==(const RepValue&) const = default;
};

struct CapacityPoint {
  std::int64_t instances = 0;
  Bracket bracket;  // median bounds over repetitions
  bool operator==(const CapacityPoint&) const = default;
};

struct DemandRow {
  std::int64_t load = 0;
  std::optional<std::int64_t> instances;  // absent: no tested count reaches the load
  bool operator==(const DemandRow&) const = default;
};

struct RunResult {
  ResultKind kind = ResultKind::AdHoc;
  BenchConfig config;
  std::optional<SearchSpec> search;
  std::optional<double> target_rate;  // AdHoc: overload rate; Latency: fixed rate
  std::vector<std::int64_t> instance_counts;
  std::vector<RepValue> reps;
  std::vector<TrialRecord> trials;
  std::map<std::string, Aggregate> aggregate;  // rate | bracket_lo | bracket_hi | p50 | p95 | p99
  std::vector<CapacityPoint> capacity;
  std::vector<DemandRow> demand;
  std::optional<metrics::LatencyHistogram> histogram;  // merged over repetitions
  std::int64_t started_unix_ms = 0;
  std::int64_t finished_unix_ms = 0;

  bool ok() const;  // no repetition ended in error
  bool operator==(const RunResult&) const = default;
};

void to_json(nlohmann::json& j, const RunResult& r);
void from_json(const nlohmann::json& j, RunResult& r);
void to_json(nlohmann::json& j, const SearchSpec& s);
void from_json(const nlohmann::json& j, SearchSpec& s);

}  // namespace shuffle::harness
