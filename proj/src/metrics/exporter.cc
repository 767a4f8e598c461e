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

#include "shuffle/metrics/exporter.h"

#include <algorithm>
#include <chrono>

#include "shuffle/engine/output_event.h"
#include "shuffle/engine/routing.h"

namespace shuffle::metrics {

LatencyExporter::LatencyExporter(mlog::Topic& output, int workers, std::string group)
    : output_(output), group_(std::move(group)) {
  const int k = std::clamp(workers, 1, static_cast<int>(output.partition_count()));
  for (const auto& range : engine::assign_partitions(static_cast<int>(output.partition_count()), k)) {
    auto w = std::make_unique<Worker>();
    w->partitions = range.partitions();
    workers_.push_back(std::move(w));
  }
}

LatencyExporter::~LatencyExporter() {
  request_stop();
  join();
}

void LatencyExporter::start() {
  if (!threads_.empty()) throw std::logic_error("exporter already started");
  for (auto& w : workers_) threads_.emplace_back([this, &w] { run(*w); });
}

void LatencyExporter::request_stop() { stop_.store(true); }

void LatencyExporter::join() {
  for (auto& t : threads_) {
    if (t.joinable()) t.join();
  }
}

std::size_t LatencyExporter::consume_once(Worker& w) {
  auto batch = output_.poll(group_, w.partitions, 4096);
  if (batch.empty()) return 0;
  {
    std::lock_guard lock(w.mu);
    for (const auto& r : batch) {
      ++w.stats.events_consumed;
      engine::OutputEvent e;
      try {
        e = engine::decode_output_event(r.payload);
      } catch (const engine::OutputEventFormatError&) {
        ++w.stats.parse_errors;
        continue;
      }
      const std::int64_t latency = r.append_ts - e.input_ts;
      if (latency < 0) {
        ++w.stats.negative_latencies;
        continue;
      }
      w.hist.observe(latency);
    }
  }
  for (auto [p, off] : batch.commit_positions()) output_.commit(group_, p, off);
  return batch.size();
}

void LatencyExporter::run(Worker& w) {
  for (;;) {
    const bool stopping = stop_.load();
    if (consume_once(w) == 0) {
      if (stopping) return;
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
  }
}

LatencyHistogram LatencyExporter::histogram() const {
  LatencyHistogram merged;
  for (const auto& w : workers_) {
    std::lock_guard lock(w->mu);
    merged.merge(w->hist);
  }
  return merged;
}

ExporterStats LatencyExporter::stats() const {
  ExporterStats total;
  for (const auto& w : workers_) {
    std::lock_guard lock(w->mu);
    total.events_consumed += w->stats.events_consumed;
    total.parse_errors += w->stats.parse_errors;
    total.negative_latencies += w->stats.negative_latencies;
  }
  return total;
}

LatencyHistogram export_latencies(mlog::Topic& output, int workers, ExporterStats* stats, const std::string& group) {
  LatencyExporter exporter(output, workers, group);
  exporter.request_stop();
  exporter.start();
  exporter.join();
  if (stats) *stats = exporter.stats();
  return exporter.histogram();
}

}  // namespace shuffle::metrics
