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

#include "shuffle/core/config.h"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "shuffle/core/text.h"

namespace shuffle {
namespace {

std::string join_errors(const ValidationErrors& errors) {
  std::ostringstream os;
  os << "invalid configuration:";
  for (const auto& e : errors) os << "\n  " << e.to_string();
  return os.str();
}

template <typename T>
std::string render(const T& v) {
  if constexpr (std::is_floating_point_v<T>) {
    return format_double(v);
  } else {
    return std::to_string(v);
  }
}

}  // namespace

std::string_view to_string(SelectivityDistribution d) {
  switch (d) {
    case SelectivityDistribution::Uniform:
      return "uniform";
    case SelectivityDistribution::NonUniform:
      return "non_uniform";
  }
  return "?";
}

std::string_view to_string(MatcherMode m) {
  return m == MatcherMode::Exhaustive ? "exhaustive" : "sampled";
}

SelectivityDistribution parse_distribution(std::string_view s) {
  if (s == "uniform") return SelectivityDistribution::Uniform;
  if (s == "non_uniform") return SelectivityDistribution::NonUniform;
  throw ConfigError("unknown selectivity_distribution '" + std::string(s) + "'");
}

MatcherMode default_matcher_mode(std::int64_t num_consumers) {
  return num_consumers <= kExhaustiveMaxConsumers ? MatcherMode::Exhaustive : MatcherMode::Sampled;
}

MatcherMode parse_matcher_mode(std::string_view s) {
  if (s == "exhaustive") return MatcherMode::Exhaustive;
  if (s == "sampled") return MatcherMode::Sampled;
  throw ConfigError("unknown matcher_mode '" + std::string(s) + "'");
}

std::string ValidationError::to_string() const {
  return field + " = " + value + ": " + constraint;
}

ConfigError::ConfigError(ValidationErrors errors)
    : std::invalid_argument(join_errors(errors)), errors_(std::move(errors)) {}

ConfigError::ConfigError(const std::string& message) : std::invalid_argument(message) {}

ValidationErrors check_config(const BenchConfig& cfg) {
  ValidationErrors errors;
  auto require = [&](bool ok, std::string field, std::string value, std::string constraint) {
    if (!ok) errors.push_back({std::move(field), std::move(value), std::move(constraint)});
  };

  require(cfg.record_size_bytes >= 1, "record_size_bytes", render(cfg.record_size_bytes), "must be >= 1");
  require(cfg.records_per_second >= 1, "records_per_second", render(cfg.records_per_second),
          "must be >= 1");
  require(cfg.num_consumers >= 1, "num_consumers", render(cfg.num_consumers), "must be >= 1");
  require(cfg.total_selectivity >= 0.0 && cfg.total_selectivity <= 1.0, "total_selectivity",
          render(cfg.total_selectivity), "must be in [0, 1]");
  require(cfg.selectivity_distribution == SelectivityDistribution::Uniform,
          "selectivity_distribution", std::string(to_string(cfg.selectivity_distribution)),
          "only 'uniform' is implemented");
  require(cfg.state_size_bytes >= kMinStateSizeBytes, "state_size_bytes",
          render(cfg.state_size_bytes),
          "must be >= " + std::to_string(kMinStateSizeBytes) + " (count, checksum, two timestamps, reserved)");
  require(cfg.output_ratio >= 1, "output_ratio", render(cfg.output_ratio), "must be >= 1");
  require(cfg.num_instances >= 1, "num_instances", render(cfg.num_instances), "must be >= 1");
  require(cfg.input_partitions >= 1, "input_partitions", render(cfg.input_partitions), "must be >= 1");
  require(cfg.output_partitions >= 1, "output_partitions", render(cfg.output_partitions), "must be >= 1");
  require(cfg.num_instances <= cfg.input_partitions, "num_instances", render(cfg.num_instances),
          "must be <= input_partitions (" + render(cfg.input_partitions) +
              ") so every instance owns a partition");
  require(std::isfinite(cfg.duration) && cfg.duration > 0.0, "duration", render(cfg.duration),
          "must be a positive number of seconds");
  require(std::isfinite(cfg.warmup) && cfg.warmup >= 0.0, "warmup", render(cfg.warmup), "must be >= 0");
  require(!(cfg.warmup >= cfg.duration), "warmup", render(cfg.warmup),
          "must be < duration (" + render(cfg.duration) + ")");
  return errors;
}

BenchConfig validate_config(const BenchConfig& cfg) {
  auto errors = check_config(cfg);
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return cfg;
}

void to_json(nlohmann::json& j, const BenchConfig& cfg) {
  j = nlohmann::json{
      {"record_size_bytes", cfg.record_size_bytes},
      {"records_per_second", cfg.records_per_second},
      {"num_consumers", cfg.num_consumers},
      {"total_selectivity", cfg.total_selectivity},
      {"selectivity_distribution", to_string(cfg.selectivity_distribution)},
      {"state_size_bytes", cfg.state_size_bytes},
      {"output_ratio", cfg.output_ratio},
      {"num_instances", cfg.num_instances},
      {"input_partitions", cfg.input_partitions},
      {"output_partitions", cfg.output_partitions},
      {"duration", cfg.duration},
      {"warmup", cfg.warmup},
      {"seed", cfg.seed},
      {"matcher_mode", to_string(cfg.matcher_mode)},
  };
}

void from_json(const nlohmann::json& j, BenchConfig& cfg) {
  if (!j.is_object()) throw ConfigError("config must be a flat JSON object");

  using Setter = std::function<void(const nlohmann::json&)>;
  auto integer = [](std::int64_t& field) -> Setter {
    return [&field](const nlohmann::json& v) {
      if (!v.is_number_integer()) throw std::invalid_argument("expected an integer");
      field = v.get<std::int64_t>();
    };
  };
  auto number = [](double& field) -> Setter {
    return [&field](const nlohmann::json& v) {
      if (!v.is_number()) throw std::invalid_argument("expected a number");
      field = v.get<double>();
    };
  };
  const std::map<std::string, Setter, std::less<>> setters = {
      {"record_size_bytes", integer(cfg.record_size_bytes)},
      {"records_per_second", integer(cfg.records_per_second)},
      {"num_consumers", integer(cfg.num_consumers)},
      {"total_selectivity", number(cfg.total_selectivity)},
      {"selectivity_distribution",
       [&cfg](const nlohmann::json& v) {
         cfg.selectivity_distribution = parse_distribution(v.get<std::string>());
       }},
      {"state_size_bytes", integer(cfg.state_size_bytes)},
      {"output_ratio", integer(cfg.output_ratio)},
      {"num_instances", integer(cfg.num_instances)},
      {"input_partitions", integer(cfg.input_partitions)},
      {"output_partitions", integer(cfg.output_partitions)},
      {"duration", number(cfg.duration)},
      {"warmup", number(cfg.warmup)},
      {"seed",
       [&cfg](const nlohmann::json& v) {
         if (!v.is_number_unsigned()) throw std::invalid_argument("expected an unsigned integer");
         cfg.seed = v.get<std::uint64_t>();
       }},
      {"matcher_mode",
       [&cfg](const nlohmann::json& v) { cfg.matcher_mode = parse_matcher_mode(v.get<std::string>()); }},
  };

  ValidationErrors errors;
  for (const auto& [key, value] : j.items()) {
    auto it = setters.find(key);
    if (it == setters.end()) {
      errors.push_back({key, value.dump(), "unknown configuration key"});
      continue;
    }
    try {
      it->second(value);
    } catch (const std::exception& e) {
      errors.push_back({key, value.dump(), e.what()});
    }
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
}

nlohmann::json read_config_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("malformed config file " + path.string() + ": " + e.what());
  }
  return j;
}

BenchConfig load_config_file(const std::filesystem::path& path) {
  BenchConfig cfg;
  from_json(read_config_json(path), cfg);
  return cfg;
}

}  // namespace shuffle
