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

#include "shuffle/loadgen/generator.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "shuffle/core/hash.h"

namespace shuffle::loadgen {
namespace {

TimestampMs duration_ms(double seconds) {
  return static_cast<TimestampMs>(std::llround(std::max(0.0, seconds) * 1000.0));
}

}  // namespace

LoadProfile profile_for(const BenchConfig& cfg, std::uint32_t producers, std::int64_t rate) {
  LoadProfile p;
  p.records_per_second = rate > 0 ? rate : cfg.records_per_second;
  p.record_size_bytes = cfg.record_size_bytes;
  p.duration_s = cfg.duration;
  p.producer_count = std::max<std::uint32_t>(1, producers);
  p.seed = derive_seed(cfg.root_seed(), "loadgen");
  return p;
}

void fill_payload(std::span<std::byte> out, Seed seed, std::uint32_t producer, std::uint64_t index) {
  std::array<std::byte, 24> key;
  store_le64(key.data(), seed.value);
  store_le64(key.data() + 8, producer);
  store_le64(key.data() + 16, index);
  SplitMix64 words(xxh64(key));

  std::size_t pos = 0;
  for (; pos + 8 <= out.size(); pos += 8) store_le64(out.data() + pos, words.next());
  if (pos < out.size()) {
    std::array<std::byte, 8> tail;
    store_le64(tail.data(), words.next());
    std::copy_n(tail.begin(), out.size() - pos, out.begin() + static_cast<std::ptrdiff_t>(pos));
  }
}

std::vector<std::byte> gen_payload(Seed seed, std::uint32_t producer, std::uint64_t index, std::size_t size) {
  if (size == 0) throw std::invalid_argument("payload size must be >= 1");
  std::vector<std::byte> out(size);
  fill_payload(out, seed, producer, index);
  return out;
}

std::int64_t producer_rate(std::int64_t total_rate, std::uint32_t producers, std::uint32_t producer) {
  const std::int64_t n = producers;
  return total_rate / n + (static_cast<std::int64_t>(producer) < total_rate % n ? 1 : 0);
}

std::uint64_t records_due(std::int64_t rate, std::uint64_t ticks) {
  const std::int64_t per_second_ticks = 1000 / kTickMs;
  return static_cast<std::uint64_t>((static_cast<uint128_t>(ticks) * static_cast<std::uint64_t>(rate)) /
                                    per_second_ticks);
}

std::uint64_t scheduled_records(std::int64_t rate, double duration_s) {
  return records_due(rate, static_cast<std::uint64_t>(duration_ms(duration_s) / kTickMs));
}

LoadGenerator::LoadGenerator(LoadProfile profile, mlog::Topic& topic, std::shared_ptr<const Clock> clock)
    : profile_(profile), topic_(topic), clock_(std::move(clock)) {
  if (profile_.producer_count == 0) throw std::invalid_argument("producer_count must be >= 1");
  if (profile_.records_per_second < profile_.producer_count) {
    throw std::invalid_argument("records_per_second must give every producer a rate >= 1");
  }
  if (profile_.record_size_bytes < 1) throw std::invalid_argument("record_size_bytes must be >= 1");
}

LoadGenerator::~LoadGenerator() {
  if (!workers_.empty() && !joined_) {
    request_stop();
    join();
  }
}

void LoadGenerator::start() {
  if (!workers_.empty()) throw std::logic_error("generator already started");
  start_ts_ = clock_->now_ms();
  sent_.assign(profile_.producer_count, 0);
  errors_.assign(profile_.producer_count, std::nullopt);
  for (std::uint32_t p = 0; p < profile_.producer_count; ++p) {
    workers_.emplace_back([this, p] { produce(p); });
  }
}

void LoadGenerator::request_stop() { stop_.store(true, std::memory_order_relaxed); }

void LoadGenerator::produce(std::uint32_t producer_id) {
  const std::int64_t rate = producer_rate(profile_.records_per_second, profile_.producer_count, producer_id);
  const TimestampMs total_ms = duration_ms(profile_.duration_s);
  const std::uint64_t ticks = static_cast<std::uint64_t>(total_ms / kTickMs);
  const TimestampMs end_ts = start_ts_ + total_ms;

  mlog::Producer out(topic_, producer_id % topic_.partition_count());
  std::vector<std::byte> buf(static_cast<std::size_t>(profile_.record_size_bytes));
  std::uint64_t index = 0;

  try {
    for (std::uint64_t tick = 0; tick < ticks && !stop_.load(std::memory_order_relaxed);) {
      clock_->sleep_until(start_ts_ + static_cast<TimestampMs>(tick) * kTickMs);
      const TimestampMs now = clock_->now_ms();
      if (now >= end_ts && tick > 0) break;
      const std::uint64_t due_tick =
          std::min<std::uint64_t>(ticks - 1, static_cast<std::uint64_t>((now - start_ts_) / kTickMs));
      const std::uint64_t target = records_due(rate, due_tick + 1);
      while (index < target) {
        fill_payload(buf, profile_.seed, producer_id, index);
        out.send(buf);
        ++index;
        sent_total_.fetch_add(1, std::memory_order_relaxed);
        if ((index & 255) == 0 &&
            (stop_.load(std::memory_order_relaxed) || clock_->now_ms() >= end_ts)) {
          break;
        }
      }
      if (clock_->now_ms() >= end_ts) break;
      tick = due_tick + 1;
    }
  } catch (const mlog::LogClosedError& e) {
    // Closing the log is how a harness releases producers blocked on the
    // retention budget after it asked them to stop.
    if (!stop_.load(std::memory_order_relaxed)) errors_[producer_id] = e.what();
    stop_.store(true, std::memory_order_relaxed);
  } catch (const std::exception& e) {
    errors_[producer_id] = e.what();
    stop_.store(true, std::memory_order_relaxed);
  }
  sent_[producer_id] = index;
}

GenReport LoadGenerator::join() {
  for (auto& w : workers_) {
    if (w.joinable()) w.join();
  }
  // Workers never sleep past their last tick, so with a simulated clock no
  // producer can observe the end of the run while another still owes records.
  if (!joined_ && !stop_.load(std::memory_order_relaxed)) {
    clock_->sleep_until(start_ts_ + duration_ms(profile_.duration_s));
  }
  joined_ = true;
  GenReport report;
  report.start_ts = start_ts_;
  report.end_ts = clock_->now_ms();
  report.per_producer = sent_;
  report.records_sent = std::accumulate(sent_.begin(), sent_.end(), std::uint64_t{0});
  const double active_s = static_cast<double>(report.end_ts - report.start_ts) / 1000.0;
  report.actual_rate = active_s > 0 ? static_cast<double>(report.records_sent) / active_s : 0.0;
  for (const auto& e : errors_) {
    if (e) {
      report.error = *e;
      break;
    }
  }
  return report;
}

GenReport run_generator(const LoadProfile& profile, mlog::Topic& topic, std::shared_ptr<const Clock> clock) {
  LoadGenerator gen(profile, topic, std::move(clock));
  gen.start();
  return gen.join();
}

}  // namespace shuffle::loadgen
