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

#include <span>
#include <stdexcept>

namespace shuffle::harness {

struct Aggregate {
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;

  double range_width() const { return max - min; }
  bool operator==(const Aggregate&) const = default;
};

// Median (mean of the two middle values for even counts) and min-max range.
// Throws std::invalid_argument for an empty list.
Aggregate aggregate_values(std::span<const double> values);

}  // namespace shuffle::harness
