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

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace shuffle::metrics {

inline constexpr std::int64_t kMaxLatencyMs = 60000;

class HistogramError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Latency frequencies at 1 ms resolution. Bucket i (0 <= i <= 60000) counts
// observations of exactly i ms; anything larger lands in the overflow bucket.
class LatencyHistogram {
 public:
  LatencyHistogram();

  // Throws HistogramError for negative latencies.
  void observe(std::int64_t latency_ms, std::uint64_t count = 1);
  void merge(const LatencyHistogram& other);

  std::uint64_t total() const { return total_; }
  bool empty() const { return total_ == 0; }
  std::uint64_t count_at(std::int64_t latency_ms) const;
  std::uint64_t overflow() const { return overflow_; }
  const std::vector<std::uint64_t>& buckets() const { return buckets_; }

  bool operator==(const LatencyHistogram&) const = default;

 private:
  std::vector<std::uint64_t> buckets_;
  std::uint64_t overflow_ = 0;
  std::uint64_t total_ = 0;
};

// A quantile in ms, or the overflow marker.
struct LatencyValue {
  std::int64_t ms = 0;
  bool overflow = false;

  std::string to_string() const;  // "42" or ">60000"
  auto operator<=>(const LatencyValue&) const = default;
};

LatencyValue parse_latency_value(const std::string& text);

// Nearest rank: the smallest bucket whose cumulative count reaches
// ceil(q * total). Throws HistogramError for an empty histogram or q outside (0, 1).
LatencyValue quantile(const LatencyHistogram& hist, double q);

// ceil(q * total), robust to q * total landing a hair above an integer.
std::uint64_t nearest_rank(double q, std::uint64_t total);

// CSV "bucket_upper_ms,count": nonzero buckets in ascending order, then the
// overflow row ">60000" if nonzero.
void write_histogram_csv(std::ostream& out, const LatencyHistogram& hist);
LatencyHistogram read_histogram_csv(std::istream& in);

// {"p50","p95","p99","total","parse_errors"}; quantiles are numbers, or the
// string ">60000" on overflow, or null for an empty histogram.
nlohmann::json latency_summary_json(const LatencyHistogram& hist, std::uint64_t parse_errors);

}  // namespace shuffle::metrics
