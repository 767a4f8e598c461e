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

// Open-loop load generator: constant-rate, random fixed-size payloads,
// keyless appends to the input topic.
//
// Pacing works on 10 ms ticks. A producer with rate r owes
// floor((k + 1) * r / 100) records once tick k is due, so every 100 ticks
// (one second) carry exactly r records and the remainder of r / 100 is spread
// evenly. The schedule is absolute: a producer woken late catches up on what
// it owes, and never emits past the end of its duration.
//
// Payload bytes are a pure function of (seed, producer, index, size), so the
// generated content can be replayed independently of timing.

#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "shuffle/core/clock.h"
#include "shuffle/core/config.h"
#include "shuffle/core/seed.h"
#include "shuffle/mlog/message_log.h"

namespace shuffle::loadgen {

inline constexpr TimestampMs kTickMs = 10;

struct LoadProfile {
  std::int64_t records_per_second = 1;
  std::int64_t record_size_bytes = 1024;
  double duration_s = 0.0;
  std::uint32_t producer_count = 1;
  Seed seed;
};

// Profile for cfg's generator at `rate` (cfg.records_per_second when 0).
LoadProfile profile_for(const BenchConfig& cfg, std::uint32_t producers, std::int64_t rate = 0);

struct GenReport {
  std::uint64_t records_sent = 0;
  double actual_rate = 0.0;  // records_sent / active seconds
  TimestampMs start_ts = 0;
  TimestampMs end_ts = 0;
  std::vector<std::uint64_t> per_producer;
  std::optional<std::string> error;
};

// Payload bytes: word j of the payload is SplitMix64's output for counter
// xxh64(LE64(seed) ‖ LE64(producer) ‖ LE64(index)) + (j + 1) * gamma,
// written little-endian and truncated to `size`. Throws on size 0.
std::vector<std::byte> gen_payload(Seed seed, std::uint32_t producer, std::uint64_t index, std::size_t size);
void fill_payload(std::span<std::byte> out, Seed seed, std::uint32_t producer, std::uint64_t index);

// Per-producer share of a total rate: even split, remainder to the lowest ids.
std::int64_t producer_rate(std::int64_t total_rate, std::uint32_t producers, std::uint32_t producer);

// Records a producer at `rate` owes once ticks 0..tick-1 are due.
std::uint64_t records_due(std::int64_t rate, std::uint64_t ticks);

// Records the whole schedule emits for one producer.
std::uint64_t scheduled_records(std::int64_t rate, double duration_s);

class LoadGenerator {
 public:
  LoadGenerator(LoadProfile profile, mlog::Topic& topic, std::shared_ptr<const Clock> clock);
  ~LoadGenerator();
  LoadGenerator(const LoadGenerator&) = delete;
  LoadGenerator& operator=(const LoadGenerator&) = delete;

  void start();
  void request_stop();
  GenReport join();

  std::uint64_t records_sent() const { return sent_total_.load(std::memory_order_relaxed); }

 private:
  void produce(std::uint32_t producer);

  LoadProfile profile_;
  mlog::Topic& topic_;
  std::shared_ptr<const Clock> clock_;
  TimestampMs start_ts_ = 0;
  std::atomic<bool> stop_{false};
  std::atomic<std::uint64_t> sent_total_{0};
  std::vector<std::uint64_t> sent_;
  std::vector<std::optional<std::string>> errors_;
  std::vector<std::thread> workers_;
  bool joined_ = false;
};

// start() + join(): blocks for the profile's duration.
GenReport run_generator(const LoadProfile& profile, mlog::Topic& topic, std::shared_ptr<const Clock> clock);

}  // namespace shuffle::loadgen
