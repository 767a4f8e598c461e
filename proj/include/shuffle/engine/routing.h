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
#include <vector>

#include "shuffle/mlog/message_log.h"

namespace shuffle::engine {

// Half-open range [begin, end) of input partitions owned by one instance.
struct PartitionRange {
  mlog::PartitionId begin = 0;
  mlog::PartitionId end = 0;

  std::uint32_t size() const { return end - begin; }
  bool contains(mlog::PartitionId p) const { return p >= begin && p < end; }
  std::vector<mlog::PartitionId> partitions() const;
  bool operator==(const PartitionRange&) const = default;
};

// Contiguous, balanced split: the first (partitions % instances) instances get
// one extra partition. Throws std::invalid_argument if instances > partitions
// or either is < 1.
std::vector<PartitionRange> assign_partitions(int num_partitions, int num_instances);

// Owning instance of a consumer key: hash_u64(key) mod instances.
std::uint32_t route(std::uint64_t consumer_key, std::uint32_t num_instances);

}  // namespace shuffle::engine
