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

#include "shuffle/engine/aggregate.h"

#include <algorithm>
#include <stdexcept>

namespace shuffle::engine {

std::uint64_t checksum_update(std::uint64_t checksum, std::span<const std::byte> payload) {
  return checksum + matcher::record_hash(payload);
}

std::vector<KeyedRecord> flatmap_match(std::span<const std::byte> payload, TimestampMs input_ts,
                                       const matcher::RuleSet& rules) {
  std::vector<matcher::ConsumerId> ids;
  matcher::match_into(matcher::record_hash(payload), rules, ids);
  std::vector<KeyedRecord> out;
  if (ids.empty()) return out;
  auto shared = std::make_shared<const std::vector<std::byte>>(payload.begin(), payload.end());
  out.reserve(ids.size());
  for (auto id : ids) out.push_back({id, input_ts, shared});
  return out;
}

AggregateResult aggregate(const std::optional<ConsumerState>& prev, const KeyedRecord& rec,
                          std::int64_t output_ratio) {
  if (output_ratio < 1) throw std::invalid_argument("output_ratio must be >= 1");
  AggregateResult r;
  if (prev) {
    r.state = *prev;
    r.state.first_ts = std::min(r.state.first_ts, rec.input_ts);
    r.state.last_ts = std::max(r.state.last_ts, rec.input_ts);
  } else {
    r.state.first_ts = r.state.last_ts = rec.input_ts;
  }
  r.state.count += 1;
  r.state.checksum = checksum_update(r.state.checksum, rec.bytes());
  if (r.state.count % static_cast<std::uint64_t>(output_ratio) == 0) {
    r.event = OutputEvent{rec.consumer_key, r.state, rec.input_ts};
  }
  return r;
}

}  // namespace shuffle::engine
