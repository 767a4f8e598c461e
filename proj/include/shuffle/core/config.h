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
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "shuffle/core/seed.h"

namespace shuffle {

// Count, checksum, first/last timestamps and one reserved word, 8 bytes each.
inline constexpr std::int64_t kMinStateSizeBytes = 40;

enum class SelectivityDistribution {
  Uniform,
  // Reserved for per-rule selectivities that are not all equal. Accepted by
  // the parser so configs can name it, rejected by validation.
  NonUniform,
};

enum class MatcherMode { Exhaustive, Sampled };

std::string_view to_string(SelectivityDistribution d);
std::string_view to_string(MatcherMode m);
SelectivityDistribution parse_distribution(std::string_view s);
MatcherMode parse_matcher_mode(std::string_view s);

// Small rule sets use the exhaustive matcher unless a mode is chosen
// explicitly: it is cheap there, and that is where the sampled matcher's
// Poisson approximation is loosest.
inline constexpr std::int64_t kExhaustiveMaxConsumers = 1000;
MatcherMode default_matcher_mode(std::int64_t num_consumers);

// One experiment's configuration. Defaults are the baseline setup, with
// desk-scale durations.
struct BenchConfig {
  std::int64_t record_size_bytes = 1024;
  std::int64_t records_per_second = 90'000;
  std::int64_t num_consumers = 1'000'000;
  double total_selectivity = 0.2;
  SelectivityDistribution selectivity_distribution = SelectivityDistribution::Uniform;
  std::int64_t state_size_bytes = kMinStateSizeBytes;
  std::int64_t output_ratio = 10;
  std::int64_t num_instances = 9;
  std::int64_t input_partitions = 9;
  std::int64_t output_partitions = 9;
  double duration = 60.0;  // seconds
  double warmup = 10.0;    // seconds
  std::uint64_t seed = 0;
  MatcherMode matcher_mode = MatcherMode::Sampled;

  Seed root_seed() const { return Seed{seed}; }

  friend bool operator==(const BenchConfig&, const BenchConfig&) = default;
};

struct ValidationError {
  std::string field;
  std::string value;
  std::string constraint;

  std::string to_string() const;
};

using ValidationErrors = std::vector<ValidationError>;

class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(ValidationErrors errors);
  explicit ConfigError(const std::string& message);

  const ValidationErrors& errors() const { return errors_; }

 private:
  ValidationErrors errors_;
};

// Every violated invariant, in field order; empty iff the config is valid.
ValidationErrors check_config(const BenchConfig& cfg);

// Returns `cfg` unchanged when valid, otherwise throws ConfigError listing
// all violations.
BenchConfig validate_config(const BenchConfig& cfg);

// Flat JSON object keyed by the snake_case field names above.
void to_json(nlohmann::json& j, const BenchConfig& cfg);

// Overlays the keys present in `j` onto `cfg`. Unknown keys and wrongly
// typed values throw ConfigError. Does not validate.
void from_json(const nlohmann::json& j, BenchConfig& cfg);

// The parsed JSON object of a config file. Throws ConfigError.
nlohmann::json read_config_json(const std::filesystem::path& path);
BenchConfig load_config_file(const std::filesystem::path& path);

}  // namespace shuffle
