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
#include <chrono>
#include <cstdint>
#include <memory>

namespace shuffle {

// Milliseconds on the shared monotonic clock of one process.
using TimestampMs = std::int64_t;

// Injected time source. Every component of an experiment shares one clock;
// latency math never touches wall-clock time.
class Clock {
 public:
  virtual ~Clock() = default;

  virtual TimestampMs now_ms() const = 0;

  // Blocks (or, for simulated clocks, advances time) until now_ms() >= t.
  virtual void sleep_until(TimestampMs t) const = 0;
};

// Monotonic milliseconds since construction.
class SteadyClock final : public Clock {
 public:
  SteadyClock();

  TimestampMs now_ms() const override;
  void sleep_until(TimestampMs t) const override;

 private:
  std::chrono::steady_clock::time_point origin_;
};

// Deterministic clock: time only moves through sleep_until() or advance_to().
// sleep_until never blocks; it moves time forward to the requested instant.
// With a single sleeping thread this yields exactly reproducible timestamps.
class SimulatedClock final : public Clock {
 public:
  explicit SimulatedClock(TimestampMs start = 0) : now_(start) {}

  TimestampMs now_ms() const override { return now_.load(std::memory_order_acquire); }
  void sleep_until(TimestampMs t) const override { advance_to(t); }

  // Monotone: never moves time backwards.
  void advance_to(TimestampMs t) const;

 private:
  mutable std::atomic<TimestampMs> now_;
};

std::shared_ptr<Clock> make_steady_clock();

// Wall-clock Unix milliseconds, used only for result bookkeeping.
std::int64_t unix_time_ms();

}  // namespace shuffle
