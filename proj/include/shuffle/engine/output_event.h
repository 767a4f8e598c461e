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

// Output-event wire format: six little-endian 64-bit fields, 48 bytes.
//
//   offset  field
//        0  consumer_key   (u64)
//        8  count          (u64)
//       16  checksum       (u64)
//       24  first_ts       (i64, ms)
//       32  last_ts        (i64, ms)
//       40  input_ts       (i64, ms)
//
// Events are appended to the output topic keyed by LE64(consumer_key).

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>

#include "shuffle/engine/aggregate.h"

namespace shuffle::engine {

inline constexpr std::size_t kOutputEventBytes = 48;

class OutputEventFormatError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::array<std::byte, kOutputEventBytes> encode_output_event(const OutputEvent& event);
void encode_output_event(const OutputEvent& event, std::span<std::byte, kOutputEventBytes> out);

// Throws OutputEventFormatError unless payload is exactly 48 bytes.
OutputEvent decode_output_event(std::span<const std::byte> payload);

std::array<std::byte, 8> output_event_key(std::uint64_t consumer_key);

}  // namespace shuffle::engine
