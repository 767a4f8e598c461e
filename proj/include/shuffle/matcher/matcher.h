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

// Matcher: maps a record to the set of consumers whose rule accepts it.
//
// Each consumer i has a selectivity p_i, the probability that its rule
// matches an arbitrary record. Two implementations share one RuleSet:
//
//  * match_exhaustive tests every rule: consumer i matches record hash h iff
//    hash_pair(h, rule_seed_i) < p_i * 2^64, with
//    rule_seed_i = derive_seed(ruleset seed, i). O(n) per record. This is the
//    literal semantics and serves as the oracle.
//
//  * match_sampled draws the number of matches k ~ Poisson(sum of p_i) and
//    then k distinct ids uniformly, all from a SplitMix64 stream seeded with
//    hash_pair(h, ruleset seed). O(k) expected per record. Valid for uniform
//    selectivities only, and accurate when every p_i is small.
//
// Both are pure functions of (record hash, RuleSet) and return sorted,
// duplicate-free id lists.

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "shuffle/core/config.h"
#include "shuffle/core/seed.h"

namespace shuffle::matcher {

using ConsumerId = std::uint64_t;

class MatcherError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class RuleSet {
 public:
  // Uniform selectivities total / n. Throws MatcherError for n < 1, total
  // outside [0, 1], or a distribution other than Uniform.
  static RuleSet uniform(std::int64_t n, double total, Seed seed, MatcherMode mode);

  // Arbitrary per-rule selectivities (each in [0, 1]). Such a set reports
  // SelectivityDistribution::NonUniform and only supports exhaustive matching.
  static RuleSet from_selectivities(std::vector<double> selectivities, Seed seed);

  std::uint64_t size() const { return n_; }
  double selectivity(ConsumerId id) const;
  double total_selectivity() const { return total_; }
  SelectivityDistribution distribution() const { return distribution_; }
  MatcherMode mode() const { return mode_; }
  Seed seed() const { return seed_; }
  Seed rule_seed(ConsumerId id) const;

 private:
  friend std::vector<ConsumerId> match_exhaustive(std::uint64_t, const RuleSet&);
  friend void match_sampled_into(std::uint64_t, const RuleSet&, std::vector<ConsumerId>&);
  friend void match_exhaustive_into(std::uint64_t, const RuleSet&, std::vector<ConsumerId>&);

  RuleSet() = default;

  std::uint64_t n_ = 0;
  double total_ = 0.0;
  SelectivityDistribution distribution_ = SelectivityDistribution::Uniform;
  MatcherMode mode_ = MatcherMode::Sampled;
  Seed seed_;
  double uniform_p_ = 0.0;
  std::vector<double> per_rule_p_;              // non-uniform only
  std::vector<std::uint64_t> rule_seeds_;       // precomputed for exhaustive use
  std::uint64_t uniform_threshold_ = 0;
  std::vector<std::uint64_t> per_rule_threshold_;
  bool uniform_always_ = false;
  double poisson_floor_ = 1.0;                  // exp(-total)
};

// Uniform rule set with p_i = total / n.
RuleSet build_rules(std::int64_t n, double total_selectivity, SelectivityDistribution dist, Seed seed,
                    MatcherMode mode = MatcherMode::Sampled);

// The matcher of an experiment: seeded with derive_seed(cfg seed, "matcher").
RuleSet rules_for(const BenchConfig& cfg);

// xxh64 of the payload bytes.
std::uint64_t record_hash(std::span<const std::byte> payload);

// Threshold for the per-rule Bernoulli test: floor(p * 2^64), saturating.
// Returns `always = true` for p >= 1.
struct RuleThreshold {
  std::uint64_t value;
  bool always;
};
RuleThreshold rule_threshold(double p);

std::vector<ConsumerId> match_exhaustive(std::uint64_t record_hash, const RuleSet& rules);
void match_exhaustive_into(std::uint64_t record_hash, const RuleSet& rules, std::vector<ConsumerId>& out);

// Throws MatcherError for non-uniform rule sets.
std::vector<ConsumerId> match_sampled(std::uint64_t record_hash, const RuleSet& rules);
void match_sampled_into(std::uint64_t record_hash, const RuleSet& rules, std::vector<ConsumerId>& out);

// Dispatches on rules.mode(). `out` is cleared first.
void match_into(std::uint64_t record_hash, const RuleSet& rules, std::vector<ConsumerId>& out);

}  // namespace shuffle::matcher
