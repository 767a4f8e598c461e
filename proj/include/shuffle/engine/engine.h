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

// The reference stream processing application.
//
// num_instances workers share nothing but the shuffle inboxes. Each worker
// loops over
//
//   poll its input partitions -> match (flatMap) -> route each duplicate to the
//   owning instance's inbox -> commit the batch -> aggregate its own inbox ->
//   append output events
//
// Input offsets are committed once every duplicate of the batch sits in a
// destination inbox, so the committed rate tracks ingest. A worker blocked on
// a full inbox keeps draining its own, which rules out cyclic waits.

#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "shuffle/core/config.h"
#include "shuffle/engine/aggregate.h"
#include "shuffle/engine/routing.h"
#include "shuffle/engine/shuffle_inbox.h"
#include "shuffle/engine/state_store.h"
#include "shuffle/matcher/matcher.h"
#include "shuffle/mlog/message_log.h"

namespace shuffle::engine {

struct EngineOptions {
  std::string input_topic = "input";
  std::string output_topic = "output";
  std::string group = "shuffle-engine";
  std::size_t poll_batch = 1024;
  std::size_t output_batch = 256;
  std::size_t inbox_capacity = 65536;
  // Holds every output event back this long before appending it. Zero in
  // normal runs; tests use it to inject a known latency.
  TimestampMs output_delay_ms = 0;
};

struct InstanceStats {
  std::uint64_t records_polled = 0;
  std::uint64_t matches_emitted = 0;
  std::uint64_t records_shuffled_in = 0;
  std::uint64_t events_written = 0;

  InstanceStats& operator+=(const InstanceStats& o);
  bool operator==(const InstanceStats&) const = default;
};

using StateSnapshot = std::map<std::uint64_t, ConsumerState>;

struct EngineReport {
  std::vector<InstanceStats> instances;
  TimestampMs start_ts = 0;
  TimestampMs end_ts = 0;
  double wall_s = 0.0;
  std::optional<std::string> error;  // first worker failure
  std::optional<StateSnapshot> final_states;

  InstanceStats totals() const;
};

class EngineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Engine {
 public:
  // Input and output topics must already exist in log. Throws
  // std::invalid_argument when num_instances exceeds the input partitions.
  Engine(const BenchConfig& cfg, mlog::MessageLog& log, std::shared_ptr<const matcher::RuleSet> rules,
         EngineOptions options = {});
  ~Engine();
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  void start();
  void request_stop();
  EngineReport join();

  bool running() const { return running_.load(); }
  bool failed() const { return failed_.load(); }

  // True once the input is fully committed and every match has become state or a written event.
  bool quiescent() const;

  InstanceStats live_totals() const;

  // All nonempty consumer states. Throws EngineError while running, or if a
  // key was ever aggregated by an instance other than its route.
  StateSnapshot snapshot_states() const;

  const std::vector<PartitionRange>& assignment() const { return assignment_; }

 private:
  struct Worker;

  void work(std::uint32_t self);
  std::size_t drain_inbox(Worker& w, std::size_t max);
  bool hand_off(Worker& w, std::vector<std::vector<KeyedRecord>>& outgoing);
  void flush_outputs(Worker& w, bool force);
  void fail(std::uint32_t self, const std::string& what);

  BenchConfig cfg_;
  mlog::MessageLog& log_;
  mlog::Topic& input_;
  mlog::Topic& output_;
  std::shared_ptr<const matcher::RuleSet> rules_;
  EngineOptions options_;
  std::vector<PartitionRange> assignment_;
  std::vector<std::unique_ptr<Worker>> workers_;
  std::vector<std::thread> threads_;

  std::atomic<bool> stop_{false};
  std::atomic<bool> running_{false};
  std::atomic<bool> failed_{false};
  std::atomic<std::int64_t> in_flight_{0};        // handed to an inbox, not yet aggregated
  std::atomic<std::int64_t> pending_outputs_{0};  // aggregated into an event not yet written
  TimestampMs start_ts_ = 0;
  bool started_ = false;
  bool joined_ = false;
};

enum class StopMode { Timed, Drain };

struct StopCondition {
  StopMode mode = StopMode::Drain;
  double duration_s = 0.0;  // Timed only

  static StopCondition timed(double seconds) { return {StopMode::Timed, seconds}; }
  static StopCondition drain() { return {StopMode::Drain, 0.0}; }
};

// Runs an engine until the stop condition holds. Drain mode stops at the first
// quiescent point; Timed mode after duration_s on the log's clock. Worker
// failures end the run early and are reported in EngineReport::error.
EngineReport run_pipeline(const BenchConfig& cfg, mlog::MessageLog& log,
                          std::shared_ptr<const matcher::RuleSet> rules, StopCondition stop,
                          EngineOptions options = {}, bool snapshot = false);

}  // namespace shuffle::engine
