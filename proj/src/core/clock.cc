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

#include "shuffle/core/clock.h"

#include <thread>

namespace shuffle {

SteadyClock::SteadyClock() : origin_(std::chrono::steady_clock::now()) {}

TimestampMs SteadyClock::now_ms() const {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::steady_clock::now() - origin_)
      .count();
}

void SteadyClock::sleep_until(TimestampMs t) const {
  std::this_thread::sleep_until(origin_ + std::chrono::milliseconds(t));
}

void SimulatedClock::advance_to(TimestampMs t) const {
  TimestampMs cur = now_.load(std::memory_order_relaxed);
  while (cur < t && !now_.compare_exchange_weak(cur, t, std::memory_order_acq_rel)) {
  }
}

std::shared_ptr<Clock> make_steady_clock() { return std::make_shared<SteadyClock>(); }

std::int64_t unix_time_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace shuffle
