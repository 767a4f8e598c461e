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

#include "shuffle/harness/trial.h"

#include <algorithm>

#include "shuffle/metrics/probes.h"

namespace shuffle::harness {

bool TrialOutcome::load_delivered() const {
  return static_cast<double>(records_sent) >= 0.99 * static_cast<double>(records_scheduled);
}

LiveTrialRunner::LiveTrialRunner(SutFactory factory, std::shared_ptr<const Clock> clock)
    : factory_(std::move(factory)), clock_(std::move(clock)) {}

TrialOutcome LiveTrialRunner::run(const TrialSpec& spec) {
  const BenchConfig cfg = validate_config(spec.cfg);
  TrialOutcome out;
  out.rate = cfg.records_per_second;

  mlog::LogOptions log_options;
  log_options.reclaim_committed = true;
  log_options.max_retained_bytes = spec.max_retained_bytes;
  mlog::MessageLog log(clock_, log_options);
  auto& input = log.create_topic("input", static_cast<int>(cfg.input_partitions));
  auto& output = log.create_topic("output", static_cast<int>(cfg.output_partitions));

  auto sut = factory_(cfg);
  if (input.lag(sut->group()) != 0 || input.end_total() != 0) {
    out.error = "trial did not start from an empty input topic";
    return out;
  }

  const auto profile = loadgen::profile_for(cfg, spec.producers);
  for (std::uint32_t p = 0; p < profile.producer_count; ++p) {
    out.records_scheduled +=
        loadgen::scheduled_records(loadgen::producer_rate(profile.records_per_second, profile.producer_count, p),
                                   profile.duration_s);
  }

  try {
    sut->start({log});
  } catch (const std::exception& e) {
    out.error = std::string("system under test failed to start: ") + e.what();
    return out;
  }

  std::optional<metrics::LatencyExporter> exporter;
  if (spec.measure_latency) {
    exporter.emplace(output, spec.exporter_workers);
    exporter->start();
  }
  metrics::ProbeSampler sampler(input, sut->group(), clock_, spec.probe_interval_ms);
  loadgen::LoadGenerator gen(profile, input, clock_);
  // Declared last so that on an early exit the log is closed before the
  // generator's destructor joins producers that may wait on the budget.
  struct CloseOnExit {
    mlog::MessageLog& log;
    ~CloseOnExit() { log.close(); }
  } close_on_exit{log};

  sampler.start();
  const TimestampMs start = clock_->now_ms();
  gen.start();
  // The harness owns the end of the trial: a producer stuck on the retention
  // budget must not stretch it.
  const TimestampMs end = start + static_cast<TimestampMs>(cfg.duration * 1000.0);
  while (clock_->now_ms() < end) clock_->sleep_until(std::min(end, clock_->now_ms() + 50));
  sampler.sample_now();
  gen.request_stop();
  sampler.request_stop();
  sampler.join();

  out.sut = sut->stop();
  if (exporter) {
    exporter->request_stop();
    exporter->join();
    out.latency = exporter->histogram();
    out.exporter = exporter->stats();
  }
  log.close();
  const auto gen_report = gen.join();

  out.records_sent = gen_report.records_sent;
  out.throughput = sampler.throughput();
  out.lag = sampler.lag();
  if (gen_report.error) {
    out.error = "load generator: " + *gen_report.error;
  } else if (out.sut.error) {
    out.error = "system under test: " + *out.sut.error;
  } else if (out.exporter.negative_latencies > 0) {
    out.error = "negative latencies observed";
  }
  return out;
}

}  // namespace shuffle::harness
