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

// The system-under-test boundary: anything that consumes the input topic
// under a consumer group and commits what it has processed can be measured.

#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "shuffle/core/config.h"
#include "shuffle/engine/engine.h"
#include "shuffle/mlog/message_log.h"

namespace shuffle::harness {

struct SutEnvironment {
  mlog::MessageLog& log;
  std::string input_topic = "input";
  std::string output_topic = "output";
};

struct SutReport {
  engine::InstanceStats totals;
  std::optional<std::string> error;
};

class SystemUnderTest {
 public:
  virtual ~SystemUnderTest() = default;
  virtual std::string name() const = 0;
  // Consumer group whose commits and lag on the input topic are probed.
  virtual std::string group() const = 0;
  virtual void start(const SutEnvironment& env) = 0;
  // Stops processing and reports. Called once, after start().
  virtual SutReport stop() = 0;
};

using SutFactory = std::function<std::unique_ptr<SystemUnderTest>(const BenchConfig& cfg)>;

// The reference engine with rules_for(cfg).
SutFactory engine_factory(engine::EngineOptions options = {});

// Consumes and commits at capacity(cfg) records/s and writes nothing: a token
// bucket refilled every 10 ms that holds at most burst_ticks ticks of credit.
using CapacityFn = std::function<double(const BenchConfig&)>;
SutFactory throttled_mock_factory(CapacityFn capacity, int burst_ticks = 10);

}  // namespace shuffle::harness
