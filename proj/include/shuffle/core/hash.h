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

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <string_view>

namespace shuffle {

__extension__ using uint128_t = unsigned __int128;

static_assert(std::endian::native == std::endian::little,
              "wire formats and hashing assume a little-endian host");

// The one pinned hash of the project: XXH64 (seed 0 unless stated).
// Every derived quantity (seeds, record hashes, routing, keyed partitioning,
// rule tests) goes through this function so runs are reproducible across
// machines and ports.
std::uint64_t xxh64(std::span<const std::byte> data, std::uint64_t seed = 0);

inline std::uint64_t xxh64(std::string_view text, std::uint64_t seed = 0) {
  return xxh64(std::as_bytes(std::span(text.data(), text.size())), seed);
}

// XXH64 of the 8-byte little-endian encoding of `value`.
std::uint64_t hash_u64(std::uint64_t value);

// XXH64 of LE64(a) ‖ LE64(b).
std::uint64_t hash_pair(std::uint64_t a, std::uint64_t b);

inline void store_le64(std::byte* out, std::uint64_t v) {
  std::memcpy(out, &v, sizeof(v));
}

inline std::uint64_t load_le64(const std::byte* in) {
  std::uint64_t v;
  std::memcpy(&v, in, sizeof(v));
  return v;
}

// SplitMix64: counter-based generator used wherever a stream of pseudo-random
// words is derived from a single 64-bit state (payload bytes, sampled matching).
class SplitMix64 {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  explicit SplitMix64(std::uint64_t state) : state_(state) {}

  static constexpr std::uint64_t finalize(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next() {
    state_ += kGamma;
    return finalize(state_);
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform in [0, bound) by multiply-shift; bias is at most bound / 2^64.
  std::uint64_t next_below(std::uint64_t bound) {
    return static_cast<std::uint64_t>((static_cast<uint128_t>(next()) * bound) >> 64);
  }

 private:
  std::uint64_t state_;
};

}  // namespace shuffle
