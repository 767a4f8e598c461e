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

#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "shuffle/core/hash.h"
#include "shuffle/loadgen/generator.h"

namespace shuffle::loadgen {
namespace {

std::string hex(const std::vector<std::byte>& b) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  for (auto x : b) {
    s += digits[std::to_integer<int>(x) >> 4];
    s += digits[std::to_integer<int>(x) & 15];
  }
  return s;
}

// All records of a topic as (append_ts, payload hash), in no particular order.
std::vector<std::pair<TimestampMs, std::uint64_t>> dump(const mlog::Topic& t) {
  std::vector<std::pair<TimestampMs, std::uint64_t>> out;
  for (mlog::PartitionId p = 0; p < t.partition_count(); ++p) {
    for (mlog::Offset off = 0;;) {
      auto batch = t.read(p, off, 4096);
      if (batch.empty()) break;
      for (const auto& r : batch) out.emplace_back(r.append_ts, xxh64(r.payload));
      off += static_cast<mlog::Offset>(batch.size());
    }
  }
  return out;
}

LoadProfile profile(std::int64_t rate, double seconds, std::uint32_t producers = 1) {
  LoadProfile p;
  p.records_per_second = rate;
  p.record_size_bytes = 32;
  p.duration_s = seconds;
  p.producer_count = producers;
  p.seed = Seed{42};
  return p;
}

TEST(Payload, LengthContract) {
  EXPECT_EQ(gen_payload(Seed{1}, 0, 0, 1024).size(), 1024u);
  EXPECT_EQ(gen_payload(Seed{1}, 0, 0, 1).size(), 1u);
  EXPECT_EQ(gen_payload(Seed{1}, 0, 0, 13).size(), 13u);
}

TEST(Payload, Pure) { EXPECT_EQ(gen_payload(Seed{9}, 0, 7, 64), gen_payload(Seed{9}, 0, 7, 64)); }

TEST(Payload, SizeZeroRejected) { EXPECT_THROW(gen_payload(Seed{1}, 0, 0, 0), std::invalid_argument); }

TEST(Payload, GoldenBytes) {
  // Frozen from tests/oracle/oracle.py.
  EXPECT_EQ(hex(gen_payload(Seed{42}, 0, 0, 16)), "c8081071723d591b8f18fbe1078a800f");
  EXPECT_EQ(hex(gen_payload(Seed{42}, 3, 9, 5)), "f87ccf5266");
}

TEST(Payload, PrefixStableAcrossSizes) {
  auto small = gen_payload(Seed{5}, 1, 2, 20);
  auto big = gen_payload(Seed{5}, 1, 2, 64);
  EXPECT_TRUE(std::equal(small.begin(), small.end(), big.begin()));
}

TEST(Payload, DistinctAcrossProducerAndIndex) {
  std::set<std::vector<std::byte>> seen;
  for (std::uint32_t p = 0; p < 4; ++p)
    for (std::uint64_t i = 0; i < 2000; ++i) seen.insert(gen_payload(Seed{3}, p, i, 16));
  EXPECT_EQ(seen.size(), 8000u);
  EXPECT_NE(gen_payload(Seed{3}, 0, 0, 16), gen_payload(Seed{4}, 0, 0, 16));
}

TEST(Payload, ByteFrequencyUniform) {
  std::array<std::uint64_t, 256> counts{};
  std::vector<std::byte> buf(64);
  for (std::uint64_t i = 0; i < 100000; ++i) {
    fill_payload(buf, Seed{42}, 0, i);
    for (auto b : buf) ++counts[std::to_integer<unsigned>(b)];
  }
  const double expected = 100000.0 * 64 / 256;
  double chi2 = 0;
  for (auto c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // Pearson statistic with 255 degrees of freedom: mean 255, sd sqrt(510).
  EXPECT_NEAR(chi2, 255.0, 3 * std::sqrt(510.0));
  // The oracle's value for the same stream.
  EXPECT_NEAR(chi2, 249.30576, 1e-6);
}

TEST(Schedule, RecordsDueSpreadsRemainder) {
  EXPECT_EQ(records_due(1000, 100), 1000u);
  EXPECT_EQ(records_due(150, 1), 1u);
  EXPECT_EQ(records_due(150, 2), 3u);
  EXPECT_EQ(records_due(150, 100), 150u);
  EXPECT_EQ(records_due(50, 1), 0u);
  EXPECT_EQ(records_due(50, 2), 1u);
  EXPECT_EQ(scheduled_records(1000, 10.0), 10000u);
  EXPECT_EQ(scheduled_records(1000, 0.0), 0u);
}

TEST(Schedule, ProducerRateSplitsEvenly) {
  EXPECT_EQ(producer_rate(1000, 2, 0), 500);
  EXPECT_EQ(producer_rate(1000, 2, 1), 500);
  EXPECT_EQ(producer_rate(10, 3, 0), 4);
  EXPECT_EQ(producer_rate(10, 3, 1), 3);
  EXPECT_EQ(producer_rate(10, 3, 2), 3);
}

class GeneratorSim : public ::testing::Test {
 protected:
  std::shared_ptr<SimulatedClock> clock_ = std::make_shared<SimulatedClock>(1000);
  mlog::MessageLog log_{clock_};
  mlog::Topic& topic_ = log_.create_topic("input", 4);
};

TEST_F(GeneratorSim, RateTimesDuration) {
  auto report = run_generator(profile(1000, 10.0), topic_, clock_);
  EXPECT_GE(report.records_sent, 9900u);
  EXPECT_LE(report.records_sent, 10100u);
  EXPECT_EQ(report.records_sent, static_cast<std::uint64_t>(topic_.end_total()));
  EXPECT_EQ(report.end_ts - report.start_ts, 10000);
  EXPECT_NEAR(report.actual_rate, 1000.0, 10.0);
  EXPECT_FALSE(report.error);
}

TEST_F(GeneratorSim, KeylessAppendsRoundRobin) {
  run_generator(profile(1000, 2.0), topic_, clock_);
  for (auto end : topic_.end_offsets()) EXPECT_EQ(end, 500);
}

TEST_F(GeneratorSim, TwoProducersSplitTheRate) {
  auto report = run_generator(profile(1000, 4.0, 2), topic_, clock_);
  ASSERT_EQ(report.per_producer.size(), 2u);
  for (auto sent : report.per_producer) {
    EXPECT_GE(sent, 1980u);
    EXPECT_LE(sent, 2020u);
  }
}

TEST_F(GeneratorSim, ZeroDurationSendsNothing) {
  auto report = run_generator(profile(1000, 0.0), topic_, clock_);
  EXPECT_EQ(report.records_sent, 0u);
  EXPECT_EQ(topic_.end_total(), 0);
}

TEST_F(GeneratorSim, OneSecondWindowsWithinOnePercent) {
  auto report = run_generator(profile(777, 8.0), topic_, clock_);
  std::map<TimestampMs, std::uint64_t> per_window;
  for (auto [ts, h] : dump(topic_)) per_window[(ts - report.start_ts) / 1000]++;
  ASSERT_EQ(per_window.size(), 8u);
  for (auto [w, count] : per_window) {
    if (w == 0) continue;
    EXPECT_NEAR(static_cast<double>(count), 777.0, 7.77) << "window " << w;
  }
  // Sliding windows of 1 s at 10 ms steps after the first second.
  std::vector<TimestampMs> ts;
  for (auto [t, h] : dump(topic_)) ts.push_back(t - report.start_ts);
  std::sort(ts.begin(), ts.end());
  for (TimestampMs from = 1000; from + 1000 <= 8000; from += 10) {
    auto n = std::lower_bound(ts.begin(), ts.end(), from + 1000) - std::lower_bound(ts.begin(), ts.end(), from);
    EXPECT_NEAR(static_cast<double>(n), 777.0, 7.77) << "window at " << from;
  }
}

TEST(Generator, ContentMultisetIsDeterministic) {
  auto run = [](std::uint32_t producers) {
    auto clock = std::make_shared<SimulatedClock>();
    mlog::MessageLog log(clock);
    auto& t = log.create_topic("input", 3);
    run_generator(profile(500, 3.0, producers), t, clock);
    std::vector<std::uint64_t> hashes;
    for (auto [ts, h] : dump(t)) hashes.push_back(h);
    std::sort(hashes.begin(), hashes.end());
    return hashes;
  };
  auto a = run(3);
  EXPECT_EQ(a.size(), 1500u);
  EXPECT_EQ(a, run(3));
  EXPECT_NE(a, run(1));
}

TEST(Generator, ContentMatchesReplay) {
  auto clock = std::make_shared<SimulatedClock>();
  mlog::MessageLog log(clock);
  auto& t = log.create_topic("input", 1);
  auto p = profile(200, 1.0, 2);
  run_generator(p, t, clock);
  std::vector<std::uint64_t> got, want;
  for (auto [ts, h] : dump(t)) got.push_back(h);
  for (std::uint32_t prod = 0; prod < 2; ++prod)
    for (std::uint64_t i = 0; i < 100; ++i) want.push_back(xxh64(gen_payload(p.seed, prod, i, 32)));
  std::sort(got.begin(), got.end());
  std::sort(want.begin(), want.end());
  EXPECT_EQ(got, want);
}

TEST(Generator, RealClockShortRun) {
  auto clock = make_steady_clock();
  mlog::MessageLog log(clock);
  auto& t = log.create_topic("input", 2);
  auto report = run_generator(profile(2000, 1.0, 2), t, clock);
  EXPECT_EQ(report.records_sent, 2000u);
  EXPECT_GE(report.end_ts - report.start_ts, 1000);
  EXPECT_FALSE(report.error);
}

TEST(Generator, StopEarly) {
  auto clock = make_steady_clock();
  mlog::MessageLog log(clock);
  auto& t = log.create_topic("input", 1);
  LoadGenerator gen(profile(1000, 60.0), t, clock);
  gen.start();
  clock->sleep_until(clock->now_ms() + 200);
  gen.request_stop();
  auto report = gen.join();
  EXPECT_LT(report.records_sent, 1000u);
  EXPECT_LT(report.end_ts - report.start_ts, 5000);
}

TEST(Generator, ClosedLogAbortsWithError) {
  auto clock = make_steady_clock();
  mlog::MessageLog log(clock);
  auto& t = log.create_topic("input", 1);
  LoadGenerator gen(profile(1000, 60.0, 2), t, clock);
  gen.start();
  clock->sleep_until(clock->now_ms() + 100);
  log.close();
  auto report = gen.join();
  ASSERT_TRUE(report.error);
  EXPECT_LT(report.end_ts - report.start_ts, 5000);
}

TEST(Generator, InvalidProfiles) {
  auto clock = std::make_shared<SimulatedClock>();
  mlog::MessageLog log(clock);
  auto& t = log.create_topic("input", 1);
  EXPECT_THROW(LoadGenerator(profile(1, 1.0, 2), t, clock), std::invalid_argument);
  auto p = profile(10, 1.0);
  p.record_size_bytes = 0;
  EXPECT_THROW(LoadGenerator(p, t, clock), std::invalid_argument);
}

}  // namespace
}  // namespace shuffle::loadgen
