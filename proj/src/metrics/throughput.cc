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

#include "shuffle/metrics/throughput.h"

#include <algorithm>
#include <string>

namespace shuffle::metrics {
namespace {

TimestampMs seconds_to_ms(double s) { return static_cast<TimestampMs>(s * 1000.0); }

}  // namespace

double committed_rate(std::span<const ThroughputSample> samples, double window_s, double warmup_s) {
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (samples[i].committed_total < samples[i - 1].committed_total) {
      throw std::invalid_argument("committed offsets decreased");
    }
    if (samples[i].ts <= samples[i - 1].ts) throw std::invalid_argument("sample timestamps must increase");
  }
  if (samples.empty()) throw InsufficientSamplesError("no throughput samples");
  const TimestampMs from = samples.front().ts + seconds_to_ms(warmup_s);
  auto first = std::find_if(samples.begin(), samples.end(), [&](const auto& s) { return s.ts >= from; });
  if (first == samples.end() || std::next(first) == samples.end()) {
    throw InsufficientSamplesError("fewer than two throughput samples after warmup");
  }
  const auto& last = samples.back();
  if (window_s > 0) {
    const TimestampMs start = last.ts - seconds_to_ms(window_s);
    if (first->ts > start) throw InsufficientSamplesError("throughput samples span less than the window");
    while (std::next(first)->ts <= start) ++first;
  }
  const double elapsed = static_cast<double>(last.ts - first->ts) / 1000.0;
  return static_cast<double>(last.committed_total - first->committed_total) / elapsed;
}

double lag_trend(std::span<const LagSample> samples, double warmup_s) {
  if (samples.empty()) throw InsufficientSamplesError("no lag samples");
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (samples[i].ts <= samples[i - 1].ts) throw std::invalid_argument("lag sample timestamps must increase");
  }
  const TimestampMs from = samples.front().ts + seconds_to_ms(warmup_s);
  auto first = std::find_if(samples.begin(), samples.end(), [&](const auto& s) { return s.ts >= from; });
  const auto n = static_cast<std::size_t>(samples.end() - first);
  if (n < kMinTrendSamples) {
    throw InsufficientSamplesError("lag trend needs " + std::to_string(kMinTrendSamples) +
                                   " samples after warmup, got " + std::to_string(n));
  }
  // Centered sums; x in seconds relative to the first sample.
  const TimestampMs t0 = first->ts;
  double mean_x = 0, mean_y = 0;
  for (auto it = first; it != samples.end(); ++it) {
    mean_x += static_cast<double>(it->ts - t0) / 1000.0;
    mean_y += static_cast<double>(it->lag);
  }
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);
  double sxy = 0, sxx = 0;
  for (auto it = first; it != samples.end(); ++it) {
    const double dx = static_cast<double>(it->ts - t0) / 1000.0 - mean_x;
    sxy += dx * (static_cast<double>(it->lag) - mean_y);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

bool is_sustained(std::span<const LagSample> samples, double target_rate, double warmup_s, SustainGoal goal) {
  return lag_trend(samples, warmup_s) <= std::max(goal.abs_floor, goal.fraction * target_rate);
}

GoalPredicate lag_trend_goal(SustainGoal goal) {
  return [goal](std::span<const LagSample> lag, double target_rate, double warmup_s) {
    return is_sustained(lag, target_rate, warmup_s, goal);
  };
}

}  // namespace shuffle::metrics
