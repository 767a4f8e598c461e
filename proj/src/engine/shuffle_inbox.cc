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

#include "shuffle/engine/shuffle_inbox.h"

#include <algorithm>
#include <stdexcept>

namespace shuffle::engine {

ShuffleInbox::ShuffleInbox(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("inbox capacity must be >= 1");
}

std::size_t ShuffleInbox::try_put(std::span<KeyedRecord> items) {
  std::size_t n = 0;
  {
    std::lock_guard lock(mu_);
    n = std::min(items.size(), capacity_ - items_.size());
    for (std::size_t i = 0; i < n; ++i) items_.push_back(std::move(items[i]));
  }
  if (n > 0) not_empty_.notify_one();
  return n;
}

std::size_t ShuffleInbox::take(std::vector<KeyedRecord>& out, std::size_t max) {
  std::size_t n = 0;
  {
    std::lock_guard lock(mu_);
    n = std::min(max, items_.size());
    for (std::size_t i = 0; i < n; ++i) {
      out.push_back(std::move(items_.front()));
      items_.pop_front();
    }
  }
  if (n > 0) not_full_.notify_all();
  return n;
}

void ShuffleInbox::wait_nonempty(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  if (items_.empty()) not_empty_.wait_for(lock, timeout);
}

void ShuffleInbox::wait_not_full(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  if (items_.size() >= capacity_) not_full_.wait_for(lock, timeout);
}

void ShuffleInbox::wake() {
  not_empty_.notify_all();
  not_full_.notify_all();
}

std::size_t ShuffleInbox::size() const {
  std::lock_guard lock(mu_);
  return items_.size();
}

}  // namespace shuffle::engine
