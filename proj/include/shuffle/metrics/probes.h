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

#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "shuffle/metrics/throughput.h"
#include "shuffle/mlog/message_log.h"

namespace shuffle::metrics {

// Timer worker sampling a consumer group's committed total and lag on the
// input topic every interval_ms (first sample at start).
class ProbeSampler {
 public:
  ProbeSampler(const mlog::Topic& topic, std::string group, std::shared_ptr<const Clock> clock,
               TimestampMs interval_ms = 1000);
  ~ProbeSampler();
  ProbeSampler(const ProbeSampler&) = delete;
  ProbeSampler& operator=(const ProbeSampler&) = delete;

  void start();
  void request_stop();
  void join();

  // Takes one sample now (also used by start()).
  void sample_now();

  std::vector<ThroughputSample> throughput() const;
  std::vector<LagSample> lag() const;

 private:
  void run();

  const mlog::Topic& topic_;
  std::string group_;
  std::shared_ptr<const Clock> clock_;
  TimestampMs interval_ms_;
  mutable std::mutex mu_;
  std::vector<ThroughputSample> throughput_;
  std::vector<LagSample> lag_;
  std::atomic<bool> stop_{false};
  std::thread thread_;
};

}  // namespace shuffle::metrics
