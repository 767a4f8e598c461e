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

// Estimators over probe time series: committed-offset rate and lag trend.

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>

#include "shuffle/core/clock.h"

namespace shuffle::metrics {

struct ThroughputSample {
  TimestampMs ts = 0;
  std::int64_t committed_total = 0;
  bool operator==(const ThroughputSample&) const = default;
};

struct LagSample {
  TimestampMs ts = 0;
  std::int64_t lag = 0;
  bool operator==(const LagSample&) const = default;
};

class InsufficientSamplesError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Rate of committed offsets in records/s. Samples before first.ts + warmup
// are dropped. With window_s > 0 the rate covers the trailing window: from the
// latest sample at or before last.ts - window_s to the last sample. With
// window_s <= 0 it covers everything after warmup. Throws
// InsufficientSamplesError if fewer than two samples qualify or they span
// less than the window, and std::invalid_argument for decreasing commits.
double committed_rate(std::span<const ThroughputSample> samples, double window_s, double warmup_s = 0.0);

// Ordinary least-squares slope of lag over time (records/s) for samples at or
// after first.ts + warmup. Needs at least kMinTrendSamples of them.
inline constexpr std::size_t kMinTrendSamples = 10;
double lag_trend(std::span<const LagSample> samples, double warmup_s);

// "Lag does not increase substantially": slope <= max(abs_floor, fraction * target).
struct SustainGoal {
  double abs_floor = 100.0;
  double fraction = 0.01;
  bool operator==(const SustainGoal&) const = default;
};

bool is_sustained(std::span<const LagSample> samples, double target_rate, double warmup_s, SustainGoal goal = {});

// Pluggable performance goal used by the sustainable search.
using GoalPredicate = std::function<bool(std::span<const LagSample> lag, double target_rate, double warmup_s)>;
GoalPredicate lag_trend_goal(SustainGoal goal = {});

}  // namespace shuffle::metrics
