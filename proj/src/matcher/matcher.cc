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

#include "shuffle/matcher/matcher.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "shuffle/core/hash.h"

namespace shuffle::matcher {
namespace {

void check_fraction(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw MatcherError(std::string(what) + " must be in [0, 1], got " + std::to_string(p));
  }
}

std::vector<std::uint64_t> precompute_rule_seeds(Seed seed, std::uint64_t n) {
  std::vector<std::uint64_t> seeds(n);
  for (std::uint64_t i = 0; i < n; ++i) seeds[i] = derive_seed(seed, i).value;
  return seeds;
}

}  // namespace

RuleThreshold rule_threshold(double p) {
  if (p >= 1.0) return {0, true};
  if (p <= 0.0) return {0, false};
  const long double scaled = std::ldexp(static_cast<long double>(p), 64);
  return {static_cast<std::uint64_t>(scaled), false};
}

RuleSet RuleSet::uniform(std::int64_t n, double total, Seed seed, MatcherMode mode) {
  if (n < 1) throw MatcherError("number of consumers must be >= 1");
  check_fraction(total, "total selectivity");
  RuleSet rs;
  rs.n_ = static_cast<std::uint64_t>(n);
  rs.total_ = total;
  rs.distribution_ = SelectivityDistribution::Uniform;
  rs.mode_ = mode;
  rs.seed_ = seed;
  rs.uniform_p_ = total / static_cast<double>(n);
  const auto t = rule_threshold(rs.uniform_p_);
  rs.uniform_threshold_ = t.value;
  rs.uniform_always_ = t.always;
  rs.poisson_floor_ = std::exp(-total);
  if (mode == MatcherMode::Exhaustive) rs.rule_seeds_ = precompute_rule_seeds(seed, rs.n_);
  return rs;
}

RuleSet RuleSet::from_selectivities(std::vector<double> selectivities, Seed seed) {
  if (selectivities.empty()) throw MatcherError("number of consumers must be >= 1");
  for (double p : selectivities) check_fraction(p, "rule selectivity");
  RuleSet rs;
  rs.n_ = selectivities.size();
  rs.total_ = std::accumulate(selectivities.begin(), selectivities.end(), 0.0);
  rs.distribution_ = SelectivityDistribution::NonUniform;
  rs.mode_ = MatcherMode::Exhaustive;
  rs.seed_ = seed;
  rs.per_rule_threshold_.reserve(rs.n_);
  for (double p : selectivities) {
    // p >= 1 is handled by the match loop; the threshold is unused then.
    rs.per_rule_threshold_.push_back(rule_threshold(p).value);
  }
  rs.per_rule_p_ = std::move(selectivities);
  rs.rule_seeds_ = precompute_rule_seeds(seed, rs.n_);
  return rs;
}

double RuleSet::selectivity(ConsumerId id) const {
  if (id >= n_) throw std::out_of_range("consumer id out of range");
  return per_rule_p_.empty() ? uniform_p_ : per_rule_p_[id];
}

Seed RuleSet::rule_seed(ConsumerId id) const {
  if (id >= n_) throw std::out_of_range("consumer id out of range");
  return rule_seeds_.empty() ? derive_seed(seed_, id) : Seed{rule_seeds_[id]};
}

RuleSet build_rules(std::int64_t n, double total_selectivity, SelectivityDistribution dist, Seed seed,
                    MatcherMode mode) {
  if (dist != SelectivityDistribution::Uniform) {
    throw MatcherError("only the uniform selectivity distribution is implemented");
  }
  return RuleSet::uniform(n, total_selectivity, seed, mode);
}

RuleSet rules_for(const BenchConfig& cfg) {
  return build_rules(cfg.num_consumers, cfg.total_selectivity, cfg.selectivity_distribution,
                     derive_seed(cfg.root_seed(), "matcher"), cfg.matcher_mode);
}

std::uint64_t record_hash(std::span<const std::byte> payload) { return xxh64(payload); }

void match_exhaustive_into(std::uint64_t h, const RuleSet& rules, std::vector<ConsumerId>& out) {
  out.clear();
  const bool precomputed = !rules.rule_seeds_.empty();
  if (rules.per_rule_p_.empty()) {
    if (rules.uniform_always_) {
      out.resize(rules.n_);
      std::iota(out.begin(), out.end(), ConsumerId{0});
      return;
    }
    if (rules.uniform_threshold_ == 0) return;
    for (std::uint64_t i = 0; i < rules.n_; ++i) {
      const std::uint64_t seed = precomputed ? rules.rule_seeds_[i] : derive_seed(rules.seed_, i).value;
      if (hash_pair(h, seed) < rules.uniform_threshold_) out.push_back(i);
    }
    return;
  }
  for (std::uint64_t i = 0; i < rules.n_; ++i) {
    if (rules.per_rule_p_[i] >= 1.0 || hash_pair(h, rules.rule_seeds_[i]) < rules.per_rule_threshold_[i]) {
      out.push_back(i);
    }
  }
}

std::vector<ConsumerId> match_exhaustive(std::uint64_t h, const RuleSet& rules) {
  std::vector<ConsumerId> out;
  match_exhaustive_into(h, rules, out);
  return out;
}

void match_sampled_into(std::uint64_t h, const RuleSet& rules, std::vector<ConsumerId>& out) {
  out.clear();
  if (rules.distribution_ != SelectivityDistribution::Uniform) {
    throw MatcherError("sampled matching requires uniform selectivities");
  }
  if (rules.total_ <= 0.0) return;

  SplitMix64 rng(hash_pair(h, rules.seed_.value));
  // Knuth's product-of-uniforms Poisson sampler; total <= 1 keeps it short.
  std::uint64_t k = 0;
  for (double prod = rng.next_double(); prod > rules.poisson_floor_; prod *= rng.next_double()) ++k;
  k = std::min(k, rules.n_);

  while (out.size() < k) {
    const ConsumerId id = rng.next_below(rules.n_);
    if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
  }
  std::sort(out.begin(), out.end());
}

std::vector<ConsumerId> match_sampled(std::uint64_t h, const RuleSet& rules) {
  std::vector<ConsumerId> out;
  match_sampled_into(h, rules, out);
  return out;
}

void match_into(std::uint64_t h, const RuleSet& rules, std::vector<ConsumerId>& out) {
  if (rules.mode() == MatcherMode::Exhaustive) {
    match_exhaustive_into(h, rules, out);
  } else {
    match_sampled_into(h, rules, out);
  }
}

}  // namespace shuffle::matcher
