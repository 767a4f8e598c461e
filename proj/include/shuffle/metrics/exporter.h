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
#include <cstdint>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "shuffle/metrics/histogram.h"
#include "shuffle/mlog/message_log.h"

namespace shuffle::metrics {

struct ExporterStats {
  std::uint64_t events_consumed = 0;
  std::uint64_t parse_errors = 0;
  std::uint64_t negative_latencies = 0;  // never expected with one shared clock
};

// Reads every output event and records output append_ts - event input_ts.
// Workers own disjoint, contiguous partition ranges of the output topic and
// keep private histograms; histogram() merges them.
class LatencyExporter {
 public:
  explicit LatencyExporter(mlog::Topic& output, int workers = 1, std::string group = "latency-exporter");
  ~LatencyExporter();
  LatencyExporter(const LatencyExporter&) = delete;
  LatencyExporter& operator=(const LatencyExporter&) = delete;

  void start();
  // Workers read on until they see their partitions empty, then exit.
  void request_stop();
  void join();

  LatencyHistogram histogram() const;
  ExporterStats stats() const;

 private:
  struct Worker {
    std::vector<mlog::PartitionId> partitions;
    mutable std::mutex mu;
    LatencyHistogram hist;
    ExporterStats stats;
  };

  void run(Worker& w);
  std::size_t consume_once(Worker& w);

  mlog::Topic& output_;
  std::string group_;
  std::vector<std::unique_ptr<Worker>> workers_;
  std::vector<std::thread> threads_;
  std::atomic<bool> stop_{false};
};

// Reads the whole output topic once with k workers and returns the histogram.
LatencyHistogram export_latencies(mlog::Topic& output, int workers, ExporterStats* stats = nullptr,
                                  const std::string& group = "latency-exporter");

}  // namespace shuffle::metrics
