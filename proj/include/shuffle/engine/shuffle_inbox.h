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

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <mutex>
#include <span>
#include <vector>

#include "shuffle/engine/aggregate.h"

namespace shuffle::engine {

// Bounded multi-producer, single-consumer queue of keyed records: the only
// channel between engine instances. Senders never block inside the inbox;
// they get a partial count back and decide how to wait.
class ShuffleInbox {
 public:
  explicit ShuffleInbox(std::size_t capacity);

  // Moves the longest prefix of items that fits; returns how many moved.
  std::size_t try_put(std::span<KeyedRecord> items);

  // Moves up to max records into out (appending); returns how many.
  std::size_t take(std::vector<KeyedRecord>& out, std::size_t max);

  // Wait up to timeout; return early on a state change or wake().
  void wait_nonempty(std::chrono::milliseconds timeout);
  void wait_not_full(std::chrono::milliseconds timeout);
  void wake();

  std::size_t size() const;
  std::size_t capacity() const { return capacity_; }

 private:
  const std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable not_empty_;
  std::condition_variable not_full_;
  std::deque<KeyedRecord> items_;
};

}  // namespace shuffle::engine
