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

#include <compare>
#include <cstdint>
#include <string_view>

namespace shuffle {

struct Seed {
  std::uint64_t value = 0;

  friend auto operator<=>(const Seed&, const Seed&) = default;
};

// Sub-seed for a named component: xxh64(LE64(root) ‖ label).
Seed derive_seed(Seed root, std::string_view label);

// Convenience for numbered sub-seeds (rules, producers): the label is the
// decimal rendering of `index`.
Seed derive_seed(Seed root, std::uint64_t index);

}  // namespace shuffle
