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

#include "shuffle/harness/experiments.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "shuffle/core/text.h"

namespace shuffle::harness {
namespace {

TrialSpec trial_spec(const BenchConfig& cfg, const ExperimentOptions& options) {
  TrialSpec spec;
  spec.cfg = cfg;
  spec.producers = options.producers;
  spec.probe_interval_ms = options.probe_interval_ms;
  spec.exporter_workers = options.exporter_workers;
  spec.max_retained_bytes = options.max_retained_bytes;
  return spec;
}

void progress(const ExperimentOptions& options, const std::string& line) {
  if (options.progress) options.progress(line);
}

std::string describe(const TrialRecord& t) {
  std::string s = "trial rate=" + std::to_string(t.rate) + " instances=" + std::to_string(t.instances) +
                  (t.sustained ? " sustained" : " not sustained");
  if (t.lag_slope) s += " lag_slope=" + format_double(*t.lag_slope);
  if (t.committed_rate) s += " committed_rate=" + format_double(*t.committed_rate);
  if (t.error) s += " error=" + *t.error;
  return s;
}

// Runs one trial at rate and judges it against the goal.
TrialRecord judge_trial(TrialRunner& runner, BenchConfig cfg, std::int64_t rate, const SearchSpec& spec, int rep,
                        const ExperimentOptions& options) {
  cfg.records_per_second = rate;
  if (spec.trial_duration_s > 0) cfg.duration = spec.trial_duration_s;
  if (spec.warmup_s >= 0) cfg.warmup = spec.warmup_s;
  const auto outcome = runner.run(trial_spec(cfg, options));

  TrialRecord t;
  t.rep = rep;
  t.instances = cfg.num_instances;
  t.rate = rate;
  t.records_sent = outcome.records_sent;
  t.records_scheduled = outcome.records_scheduled;
  t.error = outcome.error;
  if (!t.error) {
    try {
      t.lag_slope = metrics::lag_trend(outcome.lag, cfg.warmup);
      t.committed_rate = metrics::committed_rate(outcome.throughput, 0.0, cfg.warmup);
      const auto goal = options.goal ? options.goal : metrics::lag_trend_goal(spec.goal);
      // Backlog beyond the retention budget throttles the producers, which
      // would flatten the lag curve; a trial that could not deliver its load
      // is not sustained whatever the slope says.
      t.sustained = outcome.load_delivered() && goal(outcome.lag, static_cast<double>(rate), cfg.warmup);
    } catch (const std::exception& e) {
      t.error = e.what();
    }
  }
  progress(options, describe(t));
  return t;
}

std::optional<Aggregate> aggregate_of(const std::vector<double>& values) {
  if (values.empty()) return std::nullopt;
  return aggregate_values(values);
}

void put_aggregate(RunResult& r, const std::string& name, const std::vector<double>& values) {
  if (auto a = aggregate_of(values)) r.aggregate[name] = *a;
}

double latency_number(const metrics::LatencyValue& v) { return static_cast<double>(v.ms); }

RunResult begin(ResultKind kind, const BenchConfig& cfg) {
  RunResult r;
  r.kind = kind;
  r.config = cfg;
  r.started_unix_ms = unix_time_ms();
  return r;
}

Bracket median_bracket(const std::vector<Bracket>& brackets) {
  std::vector<double> los, his;
  for (const auto& b : brackets) {
    los.push_back(static_cast<double>(b.lo));
    if (b.hi) his.push_back(static_cast<double>(*b.hi));
  }
  Bracket m;
  m.lo = std::llround(aggregate_values(los).median);
  if (his.size() == brackets.size()) m.hi = std::llround(aggregate_values(his).median);
  return m;
}

}  // namespace

SearchOutcome search_bracket(const SearchSpec& spec, const TrialJudge& judge) {
  spec.validate();
  SearchOutcome out;
  std::optional<std::int64_t> passed, failed;  // largest pass, smallest fail
  auto test = [&](std::int64_t rate) {
    auto t = judge(rate);
    const bool ok = t.sustained && !t.error;
    out.trials.push_back(std::move(t));
    if (ok) {
      passed = std::max(passed.value_or(rate), rate);
    } else {
      failed = std::min(failed.value_or(rate), rate);
    }
    return ok;
  };

  if (spec.strategy == SearchStrategy::Linear) {
    for (std::int64_t rate = spec.rate_min; rate <= spec.rate_max; rate += spec.step) {
      if (!test(rate)) break;
    }
  } else {
    std::int64_t lo = spec.rate_min, hi = spec.rate_max;
    for (int i = 0; i < spec.trials && hi - lo > 1; ++i) {
      const std::int64_t mid = lo + (hi - lo) / 2;
      (test(mid) ? lo : hi) = mid;
    }
    if (!passed && (!failed || *failed != spec.rate_min)) test(spec.rate_min);
    if (!failed && (!passed || *passed != spec.rate_max)) test(spec.rate_max);
  }

  out.bracket.lo = passed.value_or(0);
  out.bracket.hi = failed;
  return out;
}

std::vector<DemandRow> resource_demand(const std::vector<CapacityPoint>& capacity,
                                       const std::vector<std::int64_t>& loads) {
  std::vector<CapacityPoint> sorted = capacity;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.instances < b.instances; });
  std::vector<DemandRow> rows;
  for (auto load : loads) {
    DemandRow row{load, std::nullopt};
    for (const auto& c : sorted) {
      if (c.bracket.lo >= load) {
        row.instances = c.instances;
        break;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<std::int64_t> default_probe_loads(const SearchSpec& spec, int count) {
  std::vector<std::int64_t> loads;
  if (count < 1) return loads;
  if (count == 1) return {spec.rate_min};
  for (int i = 0; i < count; ++i) {
    loads.push_back(spec.rate_min + (spec.rate_max - spec.rate_min) * i / (count - 1));
  }
  return loads;
}

RunResult run_adhoc(TrialRunner& runner, const BenchConfig& cfg, std::int64_t overload_rate, int reps,
                    const ExperimentOptions& options) {
  if (reps < 1) throw std::invalid_argument("reps must be >= 1");
  if (overload_rate < 1) throw std::invalid_argument("overload rate must be >= 1");
  RunResult r = begin(ResultKind::AdHoc, cfg);
  r.target_rate = static_cast<double>(overload_rate);
  std::vector<double> rates;
  for (int rep = 0; rep < reps; ++rep) {
    BenchConfig c = cfg;
    c.records_per_second = overload_rate;
    const auto outcome = runner.run(trial_spec(c, options));
    RepValue v;
    v.rep = rep;
    v.instances = cfg.num_instances;
    v.events_written = outcome.sut.totals.events_written;
    if (outcome.error) {
      v.status = "error: " + *outcome.error;
    } else {
      try {
        v.rate = metrics::committed_rate(outcome.throughput, 0.0, cfg.warmup);
        rates.push_back(*v.rate);
      } catch (const std::exception& e) {
        v.status = std::string("error: ") + e.what();
      }
    }
    progress(options, "adhoc rep=" + std::to_string(rep) + " rate=" + (v.rate ? format_double(*v.rate) : "-") +
                          " status=" + v.status);
    r.reps.push_back(std::move(v));
  }
  put_aggregate(r, "rate", rates);
  r.finished_unix_ms = unix_time_ms();
  return r;
}

RunResult run_sustainable(TrialRunner& runner, const BenchConfig& cfg, const SearchSpec& spec, int reps,
                          const ExperimentOptions& options) {
  if (reps < 1) throw std::invalid_argument("reps must be >= 1");
  spec.validate();
  RunResult r = begin(ResultKind::Sustainable, cfg);
  r.search = spec;
  std::vector<double> los, his;
  bool all_bounded = true;
  for (int rep = 0; rep < reps; ++rep) {
    auto outcome = search_bracket(spec, [&](std::int64_t rate) { return judge_trial(runner, cfg, rate, spec, rep, options); });
    RepValue v;
    v.rep = rep;
    v.instances = cfg.num_instances;
    v.bracket = outcome.bracket;
    for (const auto& t : outcome.trials) {
      if (t.error) v.status = "error: " + *t.error;
    }
    los.push_back(static_cast<double>(outcome.bracket.lo));
    if (outcome.bracket.hi) {
      his.push_back(static_cast<double>(*outcome.bracket.hi));
    } else {
      all_bounded = false;
    }
    r.trials.insert(r.trials.end(), outcome.trials.begin(), outcome.trials.end());
    r.reps.push_back(std::move(v));
  }
  put_aggregate(r, "bracket_lo", los);
  if (all_bounded) put_aggregate(r, "bracket_hi", his);
  r.finished_unix_ms = unix_time_ms();
  return r;
}

RunResult run_latency(TrialRunner& runner, const BenchConfig& cfg, std::int64_t rate, int reps,
                      const ExperimentOptions& options, metrics::SustainGoal goal) {
  if (reps < 1) throw std::invalid_argument("reps must be >= 1");
  RunResult r = begin(ResultKind::Latency, cfg);
  r.target_rate = static_cast<double>(rate);
  std::vector<double> p50, p95, p99;
  metrics::LatencyHistogram merged;
  for (int rep = 0; rep < reps; ++rep) {
    BenchConfig c = cfg;
    c.records_per_second = rate;
    TrialSpec spec = trial_spec(c, options);
    spec.measure_latency = true;
    const auto outcome = runner.run(spec);

    RepValue v;
    v.rep = rep;
    v.instances = cfg.num_instances;
    v.rate = static_cast<double>(rate);
    v.events_written = outcome.sut.totals.events_written;
    if (outcome.error) {
      v.status = "error: " + *outcome.error;
    } else if (!outcome.latency || outcome.latency->empty()) {
      v.status = "error: no output events, latency not measurable";
    } else {
      const auto& h = *outcome.latency;
      merged.merge(h);
      v.latency = LatencyQuantiles{metrics::quantile(h, 0.50), metrics::quantile(h, 0.95), metrics::quantile(h, 0.99),
                                   h.total()};
      p50.push_back(latency_number(v.latency->p50));
      p95.push_back(latency_number(v.latency->p95));
      p99.push_back(latency_number(v.latency->p99));
      try {
        const bool sustained = outcome.load_delivered() &&
                               (options.goal ? options.goal(outcome.lag, static_cast<double>(rate), c.warmup)
                                             : metrics::is_sustained(outcome.lag, static_cast<double>(rate), c.warmup, goal));
        if (!sustained) v.status = "overloaded";
      } catch (const metrics::InsufficientSamplesError& e) {
        v.status = std::string("error: ") + e.what();
      }
    }
    progress(options, "latency rep=" + std::to_string(rep) + " status=" + v.status +
                          (v.latency ? " p50=" + v.latency->p50.to_string() + " p95=" + v.latency->p95.to_string() +
                                           " p99=" + v.latency->p99.to_string()
                                     : ""));
    r.reps.push_back(std::move(v));
  }
  put_aggregate(r, "p50", p50);
  put_aggregate(r, "p95", p95);
  put_aggregate(r, "p99", p99);
  if (!merged.empty()) r.histogram = merged;
  r.finished_unix_ms = unix_time_ms();
  return r;
}

RunResult run_scalability(TrialRunner& runner, const BenchConfig& cfg, const std::vector<std::int64_t>& instance_counts,
                          const SearchSpec& spec, int reps, std::vector<std::int64_t> probe_loads,
                          const ExperimentOptions& options) {
  if (instance_counts.empty()) throw std::invalid_argument("no instance counts given");
  for (auto n : instance_counts) {
    if (n < 1 || n > cfg.input_partitions) {
      throw std::invalid_argument("instance count " + std::to_string(n) + " outside [1, input_partitions]");
    }
  }
  RunResult r = begin(ResultKind::Scalability, cfg);
  r.search = spec;
  r.instance_counts = instance_counts;
  for (auto n : instance_counts) {
    BenchConfig c = cfg;
    c.num_instances = n;
    auto sub = run_sustainable(runner, c, spec, reps, options);
    std::vector<Bracket> brackets;
    for (auto& v : sub.reps) {
      brackets.push_back(*v.bracket);
      r.reps.push_back(std::move(v));
    }
    r.trials.insert(r.trials.end(), sub.trials.begin(), sub.trials.end());
    r.capacity.push_back({n, median_bracket(brackets)});
  }
  if (probe_loads.empty()) probe_loads = default_probe_loads(spec);
  r.demand = resource_demand(r.capacity, probe_loads);
  r.finished_unix_ms = unix_time_ms();
  return r;
}

}  // namespace shuffle::harness
