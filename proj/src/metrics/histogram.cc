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

#include "shuffle/metrics/histogram.h"

#include <cmath>
#include <istream>
#include <ostream>

namespace shuffle::metrics {

LatencyHistogram::LatencyHistogram() : buckets_(static_cast<std::size_t>(kMaxLatencyMs) + 1, 0) {}

void LatencyHistogram::observe(std::int64_t latency_ms, std::uint64_t count) {
  if (latency_ms < 0) throw HistogramError("negative latency " + std::to_string(latency_ms) + " ms");
  if (latency_ms > kMaxLatencyMs) {
    overflow_ += count;
  } else {
    buckets_[static_cast<std::size_t>(latency_ms)] += count;
  }
  total_ += count;
}

void LatencyHistogram::merge(const LatencyHistogram& other) {
  for (std::size_t i = 0; i < buckets_.size(); ++i) buckets_[i] += other.buckets_[i];
  overflow_ += other.overflow_;
  total_ += other.total_;
}

std::uint64_t LatencyHistogram::count_at(std::int64_t latency_ms) const {
  if (latency_ms < 0) return 0;
  if (latency_ms > kMaxLatencyMs) return overflow_;
  return buckets_[static_cast<std::size_t>(latency_ms)];
}

std::string LatencyValue::to_string() const {
  return overflow ? ">" + std::to_string(kMaxLatencyMs) : std::to_string(ms);
}

LatencyValue parse_latency_value(const std::string& text) {
  if (text == ">" + std::to_string(kMaxLatencyMs)) return {kMaxLatencyMs + 1, true};
  std::size_t used = 0;
  const long long v = std::stoll(text, &used);
  if (used != text.size() || v < 0) throw HistogramError("bad latency value '" + text + "'");
  return {v, false};
}

std::uint64_t nearest_rank(double q, std::uint64_t total) {
  const long double exact = static_cast<long double>(q) * static_cast<long double>(total);
  auto rank = static_cast<std::uint64_t>(std::ceil(exact - 1e-9L * static_cast<long double>(total)));
  return std::max<std::uint64_t>(1, std::min(rank, total));
}

LatencyValue quantile(const LatencyHistogram& hist, double q) {
  if (hist.empty()) throw HistogramError("quantile of an empty histogram");
  if (!(q > 0.0 && q < 1.0)) throw HistogramError("quantile must be in (0, 1)");
  const std::uint64_t rank = nearest_rank(q, hist.total());
  std::uint64_t cumulative = 0;
  const auto& b = hist.buckets();
  for (std::size_t i = 0; i < b.size(); ++i) {
    cumulative += b[i];
    if (cumulative >= rank) return {static_cast<std::int64_t>(i), false};
  }
  return {kMaxLatencyMs + 1, true};
}

void write_histogram_csv(std::ostream& out, const LatencyHistogram& hist) {
  out << "bucket_upper_ms,count\n";
  const auto& b = hist.buckets();
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (b[i] != 0) out << i << ',' << b[i] << '\n';
  }
  if (hist.overflow() != 0) out << '>' << kMaxLatencyMs << ',' << hist.overflow() << '\n';
}

LatencyHistogram read_histogram_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "bucket_upper_ms,count") {
    throw HistogramError("histogram CSV must start with 'bucket_upper_ms,count'");
  }
  LatencyHistogram hist;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw HistogramError("bad histogram row '" + line + "'");
    const LatencyValue v = parse_latency_value(line.substr(0, comma));
    hist.observe(v.ms, std::stoull(line.substr(comma + 1)));
  }
  return hist;
}

nlohmann::json latency_summary_json(const LatencyHistogram& hist, std::uint64_t parse_errors) {
  auto q = [&](double p) -> nlohmann::json {
    if (hist.empty()) return nullptr;
    const auto v = quantile(hist, p);
    if (v.overflow) return v.to_string();
    return v.ms;
  };
  return {{"p50", q(0.50)}, {"p95", q(0.95)}, {"p99", q(0.99)}, {"total", hist.total()},
          {"parse_errors", parse_errors}};
}

}  // namespace shuffle::metrics
