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

#include "shuffle/harness/result.h"

#include <stdexcept>

namespace shuffle::harness {

using nlohmann::json;

std::string_view to_string(ResultKind k) {
  switch (k) {
    case ResultKind::AdHoc: return "adhoc";
    case ResultKind::Sustainable: return "sustainable";
    case ResultKind::Latency: return "latency";
    case ResultKind::Scalability: return "scalability";
  }
  return "?";
}

ResultKind parse_result_kind(std::string_view s) {
  for (auto k : {ResultKind::AdHoc, ResultKind::Sustainable, ResultKind::Latency, ResultKind::Scalability}) {
    if (to_string(k) == s) return k;
  }
  throw std::invalid_argument("unknown result kind '" + std::string(s) + "'");
}

std::string_view to_string(SearchStrategy s) { return s == SearchStrategy::Linear ? "linear" : "binary"; }

SearchStrategy parse_strategy(std::string_view s) {
  if (s == "linear") return SearchStrategy::Linear;
  if (s == "binary") return SearchStrategy::Binary;
  throw std::invalid_argument("unknown search strategy '" + std::string(s) + "'");
}

void SearchSpec::validate() const {
  if (rate_min < 1) throw std::invalid_argument("rate_min must be >= 1");
  if (rate_min >= rate_max) throw std::invalid_argument("rate_min must be < rate_max");
  if (strategy == SearchStrategy::Linear && step < 1) throw std::invalid_argument("step must be >= 1");
  if (strategy == SearchStrategy::Binary && trials < 1) throw std::invalid_argument("trials must be >= 1");
}

bool RunResult::ok() const {
  for (const auto& r : reps) {
    if (r.status.starts_with("error")) return false;
  }
  return true;
}

namespace {

template <class T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <class T>
std::optional<T> get_opt(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

json latency_value_json(const metrics::LatencyValue& v) { return v.overflow ? json(v.to_string()) : json(v.ms); }

metrics::LatencyValue latency_value_from(const json& j) {
  if (j.is_string()) return metrics::parse_latency_value(j.get<std::string>());
  return {j.get<std::int64_t>(), false};
}

json bracket_json(const Bracket& b) { return {{"lo", b.lo}, {"hi", opt(b.hi)}}; }

Bracket bracket_from(const json& j) { return {j.at("lo").get<std::int64_t>(), get_opt<std::int64_t>(j, "hi")}; }

json histogram_json(const metrics::LatencyHistogram& h) {
  json buckets = json::array();
  const auto& b = h.buckets();
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (b[i] != 0) buckets.push_back({i, b[i]});
  }
  return {{"bucket_width_ms", 1}, {"buckets", buckets}, {"overflow", h.overflow()}, {"total", h.total()}};
}

metrics::LatencyHistogram histogram_from(const json& j) {
  metrics::LatencyHistogram h;
  for (const auto& row : j.at("buckets")) h.observe(row.at(0).get<std::int64_t>(), row.at(1).get<std::uint64_t>());
  if (auto o = j.at("overflow").get<std::uint64_t>()) h.observe(metrics::kMaxLatencyMs + 1, o);
  return h;
}

}  // namespace

void to_json(json& j, const SearchSpec& s) {
  j = {{"rate_min", s.rate_min},
       {"rate_max", s.rate_max},
       {"strategy", to_string(s.strategy)},
       {"step", s.step},
       {"trials", s.trials},
       {"trial_duration_s", s.trial_duration_s},
       {"warmup_s", s.warmup_s},
       {"goal", {{"abs_floor", s.goal.abs_floor}, {"fraction", s.goal.fraction}}}};
}

void from_json(const json& j, SearchSpec& s) {
  s.rate_min = j.at("rate_min").get<std::int64_t>();
  s.rate_max = j.at("rate_max").get<std::int64_t>();
  s.strategy = parse_strategy(j.at("strategy").get<std::string>());
  s.step = j.at("step").get<std::int64_t>();
  s.trials = j.at("trials").get<int>();
  s.trial_duration_s = j.at("trial_duration_s").get<double>();
  s.warmup_s = j.at("warmup_s").get<double>();
  s.goal.abs_floor = j.at("goal").at("abs_floor").get<double>();
  s.goal.fraction = j.at("goal").at("fraction").get<double>();
}

void to_json(json& j, const RunResult& r) {
  json reps = json::array();
  for (const auto& v : r.reps) {
    json latency = nullptr;
    if (v.latency) {
      latency = {{"p50", latency_value_json(v.latency->p50)},
                 {"p95", latency_value_json(v.latency->p95)},
                 {"p99", latency_value_json(v.latency->p99)},
                 {"total", v.latency->total}};
    }
    reps.push_back({{"rep", v.rep},
                    {"instances", v.instances},
                    {"rate", opt(v.rate)},
                    {"bracket", v.bracket ? bracket_json(*v.bracket) : json(nullptr)},
                    {"latency", latency},
                    {"events_written", v.events_written},
                    {"status", v.status}});
  }
  json trials = json::array();
  for (const auto& t : r.trials) {
    trials.push_back({{"rep", t.rep},
                      {"instances", t.instances},
                      {"rate", t.rate},
                      {"sustained", t.sustained},
                      {"lag_slope", opt(t.lag_slope)},
                      {"committed_rate", opt(t.committed_rate)},
                      {"records_sent", t.records_sent},
                      {"records_scheduled", t.records_scheduled},
                      {"error", opt(t.error)}});
  }
  json aggregate = json::object();
  for (const auto& [name, a] : r.aggregate) aggregate[name] = {{"median", a.median}, {"min", a.min}, {"max", a.max}};
  json capacity = json::array();
  for (const auto& c : r.capacity) capacity.push_back({{"instances", c.instances}, {"bracket", bracket_json(c.bracket)}});
  json demand = json::array();
  for (const auto& d : r.demand) demand.push_back({{"load", d.load}, {"instances", opt(d.instances)}});

  j = {{"kind", to_string(r.kind)},
       {"config", r.config},
       {"seed", r.config.seed},
       {"search", r.search ? json(*r.search) : json(nullptr)},
       {"target_rate", opt(r.target_rate)},
       {"instance_counts", r.instance_counts},
       {"reps", reps},
       {"trials", trials},
       {"aggregate", aggregate},
       {"capacity", capacity},
       {"demand", demand},
       {"histogram", r.histogram ? histogram_json(*r.histogram) : json(nullptr)},
       {"started_unix_ms", r.started_unix_ms},
       {"finished_unix_ms", r.finished_unix_ms}};
}

void from_json(const json& j, RunResult& r) {
  r = RunResult{};
  r.kind = parse_result_kind(j.at("kind").get<std::string>());
  r.config = j.at("config").get<BenchConfig>();
  if (!j.at("search").is_null()) r.search = j.at("search").get<SearchSpec>();
  r.target_rate = get_opt<double>(j, "target_rate");
  r.instance_counts = j.at("instance_counts").get<std::vector<std::int64_t>>();
  for (const auto& v : j.at("reps")) {
    RepValue rv;
    rv.rep = v.at("rep").get<int>();
    rv.instances = v.at("instances").get<std::int64_t>();
    rv.rate = get_opt<double>(v, "rate");
    if (!v.at("bracket").is_null()) rv.bracket = bracket_from(v.at("bracket"));
    if (const auto& l = v.at("latency"); !l.is_null()) {
      rv.latency = LatencyQuantiles{latency_value_from(l.at("p50")), latency_value_from(l.at("p95")),
                                    latency_value_from(l.at("p99")), l.at("total").get<std::uint64_t>()};
    }
    rv.events_written = v.at("events_written").get<std::uint64_t>();
    rv.status = v.at("status").get<std::string>();
    r.reps.push_back(std::move(rv));
  }
  for (const auto& t : j.at("trials")) {
    TrialRecord tr;
    tr.rep = t.at("rep").get<int>();
    tr.instances = t.at("instances").get<std::int64_t>();
    tr.rate = t.at("rate").get<std::int64_t>();
    tr.sustained = t.at("sustained").get<bool>();
    tr.lag_slope = get_opt<double>(t, "lag_slope");
    tr.committed_rate = get_opt<double>(t, "committed_rate");
    tr.records_sent = t.at("records_sent").get<std::uint64_t>();
    tr.records_scheduled = t.at("records_scheduled").get<std::uint64_t>();
    tr.error = get_opt<std::string>(t, "error");
    r.trials.push_back(std::move(tr));
  }
  for (const auto& [name, a] : j.at("aggregate").items()) {
    r.aggregate[name] = {a.at("median").get<double>(), a.at("min").get<double>(), a.at("max").get<double>()};
  }
  for (const auto& c : j.at("capacity")) {
    r.capacity.push_back({c.at("instances").get<std::int64_t>(), bracket_from(c.at("bracket"))});
  }
  for (const auto& d : j.at("demand")) r.demand.push_back({d.at("load").get<std::int64_t>(), get_opt<std::int64_t>(d, "instances")});
  if (!j.at("histogram").is_null()) r.histogram = histogram_from(j.at("histogram"));
  r.started_unix_ms = j.at("started_unix_ms").get<std::int64_t>();
  r.finished_unix_ms = j.at("finished_unix_ms").get<std::int64_t>();
}

}  // namespace shuffle::harness
