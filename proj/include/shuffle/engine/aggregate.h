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

// Record-level building blocks of the pipeline: the flatMap duplication, the
// consumer-state update and the output-event rule.

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "shuffle/core/clock.h"
#include "shuffle/matcher/matcher.h"

namespace shuffle::engine {

using Payload = std::shared_ptr<const std::vector<std::byte>>;

// One duplicate of an input record, keyed by the consumer it matched.
// Duplicates of the same record share the payload buffer.
struct KeyedRecord {
  std::uint64_t consumer_key = 0;
  TimestampMs input_ts = 0;  // append_ts of the source record
  Payload payload;

  std::span<const std::byte> bytes() const {
    return payload ? std::span<const std::byte>(*payload) : std::span<const std::byte>();
  }
};

struct ConsumerState {
  std::uint64_t count = 0;
  std::uint64_t checksum = 0;
  TimestampMs first_ts = 0;
  TimestampMs last_ts = 0;

  bool operator==(const ConsumerState&) const = default;
};

struct OutputEvent {
  std::uint64_t consumer_key = 0;
  ConsumerState state;
  TimestampMs input_ts = 0;  // of the record that triggered the event

  bool operator==(const OutputEvent&) const = default;
};

// c + record_hash(payload), wrapping. Order-independent by construction.
std::uint64_t checksum_update(std::uint64_t checksum, std::span<const std::byte> payload);

// One KeyedRecord per consumer in match(record_hash(payload), rules), all
// sharing one copy of the payload. Match mode follows rules.mode().
std::vector<KeyedRecord> flatmap_match(std::span<const std::byte> payload, TimestampMs input_ts,
                                       const matcher::RuleSet& rules);

struct AggregateResult {
  ConsumerState state;
  std::optional<OutputEvent> event;
};

// Folds rec into prev (absent for a new consumer). An event carrying the new
// state is emitted whenever the new count is a multiple of output_ratio.
AggregateResult aggregate(const std::optional<ConsumerState>& prev, const KeyedRecord& rec,
                          std::int64_t output_ratio);

}  // namespace shuffle::engine
