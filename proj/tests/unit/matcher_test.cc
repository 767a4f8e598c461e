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
#include <thread>
#include <vector>

#include "shuffle/core/hash.h"
#include "shuffle/loadgen/generator.h"
#include "shuffle/matcher/matcher.h"

namespace shuffle::matcher {
namespace {

// Hashes of the oracle's payload stream: gen_payload(42, 0, i, 64).
const std::vector<std::uint64_t>& payload_hashes() {
  static const std::vector<std::uint64_t> hashes = [] {
    std::vector<std::uint64_t> out;
    std::vector<std::byte> buf(64);
    for (std::uint64_t i = 0; i < 100000; ++i) {
      loadgen::fill_payload(buf, Seed{42}, 0, i);
      out.push_back(record_hash(buf));
    }
    return out;
  }();
  return hashes;
}

bool sorted_unique(const std::vector<ConsumerId>& ids) {
  return std::adjacent_find(ids.begin(), ids.end(), std::greater_equal<>()) == ids.end();
}

// Pearson statistic of a 2 x k contingency table.
template <std::size_t K>
double two_sample_chi2(const std::array<double, K>& a, const std::array<double, K>& b) {
  double na = 0, nb = 0;
  for (std::size_t i = 0; i < K; ++i) na += a[i], nb += b[i];
  double chi2 = 0;
  for (std::size_t i = 0; i < K; ++i) {
    const double col = a[i] + b[i];
    const double ea = col * na / (na + nb), eb = col * nb / (na + nb);
    chi2 += (a[i] - ea) * (a[i] - ea) / ea + (b[i] - eb) * (b[i] - eb) / eb;
  }
  return chi2;
}

TEST(RuleSet, BaselineSelectivities) {
  auto rs = build_rules(1'000'000, 0.2, SelectivityDistribution::Uniform, Seed{1});
  EXPECT_DOUBLE_EQ(rs.selectivity(0), 2e-7);
  EXPECT_DOUBLE_EQ(rs.selectivity(999'999), 2e-7);
  EXPECT_NEAR(rs.total_selectivity(), 0.2, 1e-9);
  EXPECT_NEAR(rs.selectivity(0) * static_cast<double>(rs.size()), 0.2, 1e-9);
}

TEST(RuleSet, ZeroAndOne) {
  auto zero = build_rules(50, 0.0, SelectivityDistribution::Uniform, Seed{1});
  for (ConsumerId i = 0; i < 50; ++i) EXPECT_EQ(zero.selectivity(i), 0.0);
  auto one = build_rules(1, 1.0, SelectivityDistribution::Uniform, Seed{1}, MatcherMode::Exhaustive);
  EXPECT_EQ(one.selectivity(0), 1.0);
  for (std::uint64_t h : {0ull, 1ull, ~0ull}) EXPECT_EQ(match_exhaustive(h, one), std::vector<ConsumerId>{0});
}

TEST(RuleSet, RejectsOutOfRange) {
  EXPECT_THROW(build_rules(10, 1.5, SelectivityDistribution::Uniform, Seed{1}), MatcherError);
  EXPECT_THROW(build_rules(10, -0.1, SelectivityDistribution::Uniform, Seed{1}), MatcherError);
  EXPECT_THROW(build_rules(0, 0.2, SelectivityDistribution::Uniform, Seed{1}), MatcherError);
  EXPECT_THROW(build_rules(10, 0.2, SelectivityDistribution::NonUniform, Seed{1}), MatcherError);
  EXPECT_THROW(RuleSet::from_selectivities({0.5, 1.2}, Seed{1}), MatcherError);
}

TEST(RuleSet, RuleSeedsAreDerived) {
  auto rs = build_rules(10, 0.2, SelectivityDistribution::Uniform, Seed{5}, MatcherMode::Exhaustive);
  auto lazy = build_rules(10, 0.2, SelectivityDistribution::Uniform, Seed{5}, MatcherMode::Sampled);
  for (ConsumerId i = 0; i < 10; ++i) {
    EXPECT_EQ(rs.rule_seed(i), derive_seed(Seed{5}, i));
    EXPECT_EQ(lazy.rule_seed(i), derive_seed(Seed{5}, i));
  }
}

TEST(RuleSet, ConfigSeedsTheMatcher) {
  BenchConfig cfg;
  cfg.num_consumers = 100;
  cfg.seed = 9;
  auto rs = rules_for(cfg);
  EXPECT_EQ(rs.size(), 100u);
  EXPECT_EQ(rs.seed(), derive_seed(Seed{9}, "matcher"));
  EXPECT_EQ(rs.mode(), cfg.matcher_mode);
}

TEST(Threshold, Scaling) {
  EXPECT_EQ(rule_threshold(0.0).value, 0u);
  EXPECT_FALSE(rule_threshold(0.0).always);
  EXPECT_TRUE(rule_threshold(1.0).always);
  EXPECT_EQ(rule_threshold(0.5).value, 1ull << 63);
  EXPECT_EQ(rule_threshold(0.25).value, 1ull << 62);
}

TEST(RecordHash, Pinned) {
  EXPECT_EQ(record_hash({}), 0xef46db3751d8e999ull);
  const std::string a = "payload";
  EXPECT_EQ(record_hash(std::as_bytes(std::span(a))), record_hash(std::as_bytes(std::span(a))));
}

TEST(RecordHash, LowFractionTally) {
  const auto threshold = rule_threshold(0.2).value;
  std::uint64_t below = 0;
  for (auto h : payload_hashes()) below += h < threshold;
  EXPECT_EQ(below, 20141u);  // oracle tally
  EXPECT_NEAR(below / 1e5, 0.2, 0.004);
}

TEST(Exhaustive, ZeroSelectivityIsEmpty) {
  auto rs = build_rules(100, 0.0, SelectivityDistribution::Uniform, Seed{5}, MatcherMode::Exhaustive);
  for (std::size_t i = 0; i < 1000; ++i) EXPECT_TRUE(match_exhaustive(payload_hashes()[i], rs).empty());
}

TEST(Exhaustive, OracleTally) {
  auto rs = build_rules(100, 0.2, SelectivityDistribution::Uniform, Seed{5}, MatcherMode::Exhaustive);
  std::uint64_t total = 0;
  std::vector<ConsumerId> out;
  for (auto h : payload_hashes()) {
    match_exhaustive_into(h, rs, out);
    ASSERT_TRUE(sorted_unique(out));
    total += out.size();
  }
  EXPECT_EQ(total, 20136u);  // oracle replay
  EXPECT_NEAR(total / 1e5, 0.2, 0.005);
  EXPECT_EQ(match_exhaustive(payload_hashes()[4], rs), std::vector<ConsumerId>{86});
  for (std::size_t i = 0; i < 4; ++i) EXPECT_TRUE(match_exhaustive(payload_hashes()[i], rs).empty());
}

TEST(Exhaustive, LazySeedsAgreeWithPrecomputed) {
  auto pre = build_rules(100, 0.2, SelectivityDistribution::Uniform, Seed{5}, MatcherMode::Exhaustive);
  auto lazy = build_rules(100, 0.2, SelectivityDistribution::Uniform, Seed{5}, MatcherMode::Sampled);
  for (std::size_t i = 0; i < 2000; ++i) {
    EXPECT_EQ(match_exhaustive(payload_hashes()[i], pre), match_exhaustive(payload_hashes()[i], lazy));
  }
}

TEST(Exhaustive, PerRuleSelectivities) {
  auto rs = RuleSet::from_selectivities({1.0, 0.0, 0.5}, Seed{2});
  EXPECT_EQ(rs.distribution(), SelectivityDistribution::NonUniform);
  EXPECT_NEAR(rs.total_selectivity(), 1.5, 1e-12);
  std::uint64_t hits2 = 0;
  for (std::size_t i = 0; i < 10000; ++i) {
    auto m = match_exhaustive(payload_hashes()[i], rs);
    ASSERT_FALSE(m.empty());
    EXPECT_EQ(m.front(), 0u);
    EXPECT_EQ(std::count(m.begin(), m.end(), 1u), 0);
    hits2 += std::count(m.begin(), m.end(), 2u);
  }
  EXPECT_NEAR(hits2 / 1e4, 0.5, 3 * std::sqrt(0.25 / 1e4));
  EXPECT_THROW(match_sampled(1, rs), MatcherError);
}

TEST(Sampled, ZeroSelectivityIsEmpty) {
  auto rs = build_rules(1000, 0.0, SelectivityDistribution::Uniform, Seed{5});
  for (std::size_t i = 0; i < 1000; ++i) EXPECT_TRUE(match_sampled(payload_hashes()[i], rs).empty());
}

TEST(Sampled, Deterministic) {
  auto rs = build_rules(1'000'000, 0.9, SelectivityDistribution::Uniform, Seed{5});
  for (std::size_t i = 0; i < 1000; ++i) {
    EXPECT_EQ(match_sampled(payload_hashes()[i], rs), match_sampled(payload_hashes()[i], rs));
  }
}

TEST(Sampled, BaselineMeanAndUniformity) {
  constexpr std::uint64_t n = 1'000'000;
  auto rs = build_rules(n, 0.2, SelectivityDistribution::Uniform, Seed{5});
  std::vector<double> bins(1000, 0.0);
  std::uint64_t total = 0;
  std::vector<ConsumerId> out;
  for (auto h : payload_hashes()) {
    match_sampled_into(h, rs, out);
    ASSERT_TRUE(sorted_unique(out));
    total += out.size();
    for (auto id : out) {
      ASSERT_LT(id, n);
      bins[id * 1000 / n] += 1;
    }
  }
  // Poisson law: sd of the mean is sqrt(0.2 / 1e5) = 0.0014, so 0.005 is > 3 sigma.
  EXPECT_NEAR(total / 1e5, 0.2, 0.005);
  const double expected = static_cast<double>(total) / 1000.0;
  double chi2 = 0;
  for (double c : bins) chi2 += (c - expected) * (c - expected) / expected;
  EXPECT_LT(chi2, 1105.917);  // chi-square(999) at alpha 0.01
}

TEST(Sampled, CappedAtConsumerCount) {
  auto rs = build_rules(2, 1.0, SelectivityDistribution::Uniform, Seed{5});
  for (std::size_t i = 0; i < 5000; ++i) {
    auto m = match_sampled(payload_hashes()[i], rs);
    ASSERT_LE(m.size(), 2u);
    ASSERT_TRUE(sorted_unique(m));
  }
}

TEST(Sampled, SizeDistributionMatchesExhaustiveAtSmallN) {
  auto ex = build_rules(100, 0.2, SelectivityDistribution::Uniform, Seed{5}, MatcherMode::Exhaustive);
  auto sa = build_rules(100, 0.2, SelectivityDistribution::Uniform, Seed{5}, MatcherMode::Sampled);
  std::array<double, 4> a{}, b{};
  for (auto h : payload_hashes()) {
    a[std::min<std::size_t>(3, match_exhaustive(h, ex).size())] += 1;
    b[std::min<std::size_t>(3, match_sampled(h, sa).size())] += 1;
  }
  // Sizes 0, 1, 2, >=3; df = 3.
  EXPECT_LT(two_sample_chi2(a, b), 11.345);
}

TEST(Dispatch, FollowsMode) {
  auto ex = build_rules(100, 0.5, SelectivityDistribution::Uniform, Seed{5}, MatcherMode::Exhaustive);
  auto sa = build_rules(100, 0.5, SelectivityDistribution::Uniform, Seed{5}, MatcherMode::Sampled);
  std::vector<ConsumerId> out{99, 98};
  for (std::size_t i = 0; i < 200; ++i) {
    const auto h = payload_hashes()[i];
    match_into(h, ex, out);
    EXPECT_EQ(out, match_exhaustive(h, ex));
    match_into(h, sa, out);
    EXPECT_EQ(out, match_sampled(h, sa));
  }
}

TEST(Concurrency, PureAcrossThreads) {
  auto rs = build_rules(1000, 0.7, SelectivityDistribution::Uniform, Seed{5}, MatcherMode::Exhaustive);
  std::vector<std::uint64_t> sums(4, 0);
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (std::size_t i = 0; i < 2000; ++i) {
        for (auto id : match_exhaustive(payload_hashes()[i], rs)) sums[t] += id + 1;
        for (auto id : match_sampled(payload_hashes()[i], rs)) sums[t] += (id + 1) << 20;
      }
    });
  }
  for (auto& th : threads) th.join();
  for (std::size_t t = 1; t < 4; ++t) EXPECT_EQ(sums[t], sums[0]);
}

}  // namespace
}  // namespace shuffle::matcher
