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

#include "shuffle/engine/routing.h"

#include <stdexcept>
#include <string>

#include "shuffle/core/hash.h"

namespace shuffle::engine {

std::vector<mlog::PartitionId> PartitionRange::partitions() const {
  std::vector<mlog::PartitionId> out;
  for (auto p = begin; p < end; ++p) out.push_back(p);
  return out;
}

std::vector<PartitionRange> assign_partitions(int num_partitions, int num_instances) {
  if (num_partitions < 1 || num_instances < 1) {
    throw std::invalid_argument("partitions and instances must be >= 1");
  }
  if (num_instances > num_partitions) {
    throw std::invalid_argument("more instances (" + std::to_string(num_instances) + ") than input partitions (" +
                                std::to_string(num_partitions) + ")");
  }
  const auto base = static_cast<mlog::PartitionId>(num_partitions / num_instances);
  const auto extra = static_cast<mlog::PartitionId>(num_partitions % num_instances);
  std::vector<PartitionRange> out;
  mlog::PartitionId next = 0;
  for (mlog::PartitionId i = 0; i < static_cast<mlog::PartitionId>(num_instances); ++i) {
    const mlog::PartitionId len = base + (i < extra ? 1 : 0);
    out.push_back({next, next + len});
    next += len;
  }
  return out;
}

std::uint32_t route(std::uint64_t consumer_key, std::uint32_t num_instances) {
  if (num_instances == 0) throw std::invalid_argument("num_instances must be >= 1");
  return static_cast<std::uint32_t>(hash_u64(consumer_key) % num_instances);
}

}  // namespace shuffle::engine
