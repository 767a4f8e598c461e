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

#include "shuffle/harness/aggregation.h"

#include <algorithm>
#include <vector>

namespace shuffle::harness {

Aggregate aggregate_values(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("nothing to aggregate");
  std::vector<double> v(values.begin(), values.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double median = v[mid];
  if (v.size() % 2 == 0) {
    const double below = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    median = (below + median) / 2.0;
  }
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return {median, *lo, *hi};
}

}  // namespace shuffle::harness
