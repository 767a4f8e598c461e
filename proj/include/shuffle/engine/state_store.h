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

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "shuffle/engine/aggregate.h"

namespace shuffle::engine {

// Per-instance consumer states in an open-addressing table (linear probing).
//
// Every state occupies state_size_bytes of a contiguous arena:
//
//   offset  field
//        0  count
//        8  checksum
//       16  first_ts
//       24  last_ts
//       32  owner tag (instance id that created the state)
//       40  zero padding up to state_size_bytes
class ConsumerStateStore {
 public:
  ConsumerStateStore(std::size_t state_size_bytes, std::uint32_t owner);

  std::optional<ConsumerState> get(std::uint64_t key) const;
  void put(std::uint64_t key, const ConsumerState& state);

  // Owner tag of an existing state.
  std::optional<std::uint32_t> owner_of(std::uint64_t key) const;

  std::size_t size() const { return size_; }
  std::size_t state_size_bytes() const { return state_size_; }
  std::uint32_t owner() const { return owner_; }
  // Bytes of the state arena currently allocated.
  std::size_t arena_bytes() const { return arena_.size(); }

  void for_each(const std::function<void(std::uint64_t, const ConsumerState&)>& fn) const;

  // Raw slot bytes; for layout tests.
  std::span<const std::byte> raw(std::uint64_t key) const;

 private:
  static constexpr std::uint64_t kEmpty = ~std::uint64_t{0};

  std::size_t find_slot(std::uint64_t key) const;
  void grow();
  std::byte* slot_bytes(std::size_t slot) { return arena_.data() + slot * state_size_; }
  const std::byte* slot_bytes(std::size_t slot) const { return arena_.data() + slot * state_size_; }

  std::size_t state_size_;
  std::uint32_t owner_;
  std::size_t size_ = 0;
  std::vector<std::uint64_t> keys_;
  std::vector<std::byte> arena_;
};

}  // namespace shuffle::engine
