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

#include "shuffle/engine/state_store.h"

#include <algorithm>
#include <stdexcept>

#include "shuffle/core/config.h"
#include "shuffle/core/hash.h"

namespace shuffle::engine {
namespace {

constexpr std::size_t kInitialSlots = 1024;

ConsumerState read_state(const std::byte* p) {
  return {load_le64(p), load_le64(p + 8), static_cast<TimestampMs>(load_le64(p + 16)),
          static_cast<TimestampMs>(load_le64(p + 24))};
}

}  // namespace

ConsumerStateStore::ConsumerStateStore(std::size_t state_size_bytes, std::uint32_t owner)
    : state_size_(state_size_bytes), owner_(owner) {
  if (state_size_bytes < static_cast<std::size_t>(kMinStateSizeBytes)) {
    throw std::invalid_argument("state_size_bytes below the 40-byte minimum");
  }
  keys_.assign(kInitialSlots, kEmpty);
  arena_.assign(kInitialSlots * state_size_, std::byte{0});
}

std::size_t ConsumerStateStore::find_slot(std::uint64_t key) const {
  const std::size_t mask = keys_.size() - 1;
  std::size_t i = SplitMix64::finalize(key) & mask;
  while (keys_[i] != kEmpty && keys_[i] != key) i = (i + 1) & mask;
  return i;
}

void ConsumerStateStore::grow() {
  std::vector<std::uint64_t> old_keys(keys_.size() * 2, kEmpty);
  std::vector<std::byte> old_arena(old_keys.size() * state_size_, std::byte{0});
  old_keys.swap(keys_);
  old_arena.swap(arena_);
  for (std::size_t s = 0; s < old_keys.size(); ++s) {
    if (old_keys[s] == kEmpty) continue;
    const std::size_t slot = find_slot(old_keys[s]);
    keys_[slot] = old_keys[s];
    std::copy_n(old_arena.data() + s * state_size_, state_size_, slot_bytes(slot));
  }
}

std::optional<ConsumerState> ConsumerStateStore::get(std::uint64_t key) const {
  const std::size_t slot = find_slot(key);
  if (keys_[slot] == kEmpty) return std::nullopt;
  return read_state(slot_bytes(slot));
}

void ConsumerStateStore::put(std::uint64_t key, const ConsumerState& s) {
  if (key == kEmpty) throw std::invalid_argument("consumer key reserved");
  std::size_t slot = find_slot(key);
  if (keys_[slot] == kEmpty) {
    if ((size_ + 1) * 10 > keys_.size() * 7) {
      grow();
      slot = find_slot(key);
    }
    keys_[slot] = key;
    ++size_;
    store_le64(slot_bytes(slot) + 32, owner_);
  }
  std::byte* p = slot_bytes(slot);
  store_le64(p, s.count);
  store_le64(p + 8, s.checksum);
  store_le64(p + 16, static_cast<std::uint64_t>(s.first_ts));
  store_le64(p + 24, static_cast<std::uint64_t>(s.last_ts));
}

std::optional<std::uint32_t> ConsumerStateStore::owner_of(std::uint64_t key) const {
  const std::size_t slot = find_slot(key);
  if (keys_[slot] == kEmpty) return std::nullopt;
  return static_cast<std::uint32_t>(load_le64(slot_bytes(slot) + 32));
}

void ConsumerStateStore::for_each(const std::function<void(std::uint64_t, const ConsumerState&)>& fn) const {
  for (std::size_t s = 0; s < keys_.size(); ++s) {
    if (keys_[s] != kEmpty) fn(keys_[s], read_state(slot_bytes(s)));
  }
}

std::span<const std::byte> ConsumerStateStore::raw(std::uint64_t key) const {
  const std::size_t slot = find_slot(key);
  if (keys_[slot] == kEmpty) return {};
  return {slot_bytes(slot), state_size_};
}

}  // namespace shuffle::engine
