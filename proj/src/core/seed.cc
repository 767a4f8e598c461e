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

#include "shuffle/core/seed.h"

#include <string>

#include "shuffle/core/hash.h"

namespace shuffle {

Seed derive_seed(Seed root, std::string_view label) {
  std::string buf(8 + label.size(), '\0');
  store_le64(reinterpret_cast<std::byte*>(buf.data()), root.value);
  buf.replace(8, label.size(), label);
  return Seed{xxh64(buf)};
}

Seed derive_seed(Seed root, std::uint64_t index) {
  return derive_seed(root, std::to_string(index));
}

}  // namespace shuffle
