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

#include "shuffle/metrics/probes.h"

#include <algorithm>
#include <stdexcept>

namespace shuffle::metrics {

ProbeSampler::ProbeSampler(const mlog::Topic& topic, std::string group, std::shared_ptr<const Clock> clock,
                           TimestampMs interval_ms)
    : topic_(topic), group_(std::move(group)), clock_(std::move(clock)), interval_ms_(interval_ms) {
  if (interval_ms_ < 1) throw std::invalid_argument("probe interval must be >= 1 ms");
}

ProbeSampler::~ProbeSampler() {
  request_stop();
  join();
}

void ProbeSampler::sample_now() {
  const TimestampMs ts = clock_->now_ms();
  // Committed before end offsets, so lag is never under-reported.
  const auto committed = topic_.committed_total(group_);
  const auto lag = topic_.end_total() - committed;
  std::lock_guard lock(mu_);
  if (!throughput_.empty() && throughput_.back().ts >= ts) return;
  throughput_.push_back({ts, committed});
  lag_.push_back({ts, lag});
}

void ProbeSampler::start() {
  if (thread_.joinable()) throw std::logic_error("sampler already started");
  thread_ = std::thread([this] { run(); });
}

void ProbeSampler::run() {
  const TimestampMs t0 = clock_->now_ms();
  sample_now();
  for (TimestampMs k = 1; !stop_.load(); ++k) {
    const TimestampMs due = t0 + k * interval_ms_;
    // Sleep in short steps so stop requests are honoured promptly.
    while (!stop_.load() && clock_->now_ms() < due) clock_->sleep_until(std::min(due, clock_->now_ms() + 20));
    if (stop_.load()) break;
    sample_now();
  }
}

void ProbeSampler::request_stop() { stop_.store(true); }

void ProbeSampler::join() {
  if (thread_.joinable()) thread_.join();
}

std::vector<ThroughputSample> ProbeSampler::throughput() const {
  std::lock_guard lock(mu_);
  return throughput_;
}

std::vector<LagSample> ProbeSampler::lag() const {
  std::lock_guard lock(mu_);
  return lag_;
}

}  // namespace shuffle::metrics
