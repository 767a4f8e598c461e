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

// A trial: one independent run at a fixed generation rate, from fresh topics
// and a fresh system under test.

#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "shuffle/core/config.h"
#include "shuffle/harness/systems.h"
#include "shuffle/loadgen/generator.h"
#include "shuffle/metrics/exporter.h"
#include "shuffle/metrics/histogram.h"
#include "shuffle/metrics/throughput.h"

namespace shuffle::harness {

struct TrialSpec {
  BenchConfig cfg;  // records_per_second is the generation rate; duration, warmup apply
  std::uint32_t producers = 1;
  bool measure_latency = false;
  int exporter_workers = 1;
  TimestampMs probe_interval_ms = 1000;
  // Input backlog beyond this blocks producers. Committed data is reclaimed.
  std::size_t max_retained_bytes = std::size_t{512} << 20;
};

struct TrialOutcome {
  std::int64_t rate = 0;
  std::uint64_t records_sent = 0;
  std::uint64_t records_scheduled = 0;
  std::vector<metrics::ThroughputSample> throughput;
  std::vector<metrics::LagSample> lag;
  SutReport sut;
  std::optional<metrics::LatencyHistogram> latency;
  metrics::ExporterStats exporter;
  std::optional<std::string> error;

  // The generator delivered at least 99% of its schedule.
  bool load_delivered() const;
};

class TrialRunner {
 public:
  virtual ~TrialRunner() = default;
  virtual TrialOutcome run(const TrialSpec& spec) = 0;
};

// Real threads on a real clock. Latency trials add the exporter.
class LiveTrialRunner final : public TrialRunner {
 public:
  explicit LiveTrialRunner(SutFactory factory, std::shared_ptr<const Clock> clock = make_steady_clock());
  TrialOutcome run(const TrialSpec& spec) override;

 private:
  SutFactory factory_;
  std::shared_ptr<const Clock> clock_;
};

}  // namespace shuffle::harness
