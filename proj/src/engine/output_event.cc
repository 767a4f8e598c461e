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

#include "shuffle/engine/output_event.h"

#include <string>

#include "shuffle/core/hash.h"

namespace shuffle::engine {

void encode_output_event(const OutputEvent& e, std::span<std::byte, kOutputEventBytes> out) {
  store_le64(out.data() + 0, e.consumer_key);
  store_le64(out.data() + 8, e.state.count);
  store_le64(out.data() + 16, e.state.checksum);
  store_le64(out.data() + 24, static_cast<std::uint64_t>(e.state.first_ts));
  store_le64(out.data() + 32, static_cast<std::uint64_t>(e.state.last_ts));
  store_le64(out.data() + 40, static_cast<std::uint64_t>(e.input_ts));
}

std::array<std::byte, kOutputEventBytes> encode_output_event(const OutputEvent& e) {
  std::array<std::byte, kOutputEventBytes> out;
  encode_output_event(e, out);
  return out;
}

OutputEvent decode_output_event(std::span<const std::byte> p) {
  if (p.size() != kOutputEventBytes) {
    throw OutputEventFormatError("output event must be 48 bytes, got " + std::to_string(p.size()));
  }
  OutputEvent e;
  e.consumer_key = load_le64(p.data() + 0);
  e.state.count = load_le64(p.data() + 8);
  e.state.checksum = load_le64(p.data() + 16);
  e.state.first_ts = static_cast<TimestampMs>(load_le64(p.data() + 24));
  e.state.last_ts = static_cast<TimestampMs>(load_le64(p.data() + 32));
  e.input_ts = static_cast<TimestampMs>(load_le64(p.data() + 40));
  return e;
}

std::array<std::byte, 8> output_event_key(std::uint64_t consumer_key) {
  std::array<std::byte, 8> key;
  store_le64(key.data(), consumer_key);
  return key;
}

}  // namespace shuffle::engine
