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

#include "shuffle/harness/systems.h"

#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "shuffle/matcher/matcher.h"

namespace shuffle::harness {
namespace {

class EngineSystem final : public SystemUnderTest {
 public:
  EngineSystem(const BenchConfig& cfg, engine::EngineOptions options) : cfg_(cfg), options_(std::move(options)) {}

  std::string name() const override { return "engine"; }
  std::string group() const override { return options_.group; }

  void start(const SutEnvironment& env) override {
    options_.input_topic = env.input_topic;
    options_.output_topic = env.output_topic;
    auto rules = std::make_shared<const matcher::RuleSet>(matcher::rules_for(cfg_));
    engine_ = std::make_unique<engine::Engine>(cfg_, env.log, std::move(rules), options_);
    engine_->start();
  }

  SutReport stop() override {
    engine_->request_stop();
    auto report = engine_->join();
    return {report.totals(), report.error};
  }

 private:
  BenchConfig cfg_;
  engine::EngineOptions options_;
  std::unique_ptr<engine::Engine> engine_;
};

class ThrottledMock final : public SystemUnderTest {
 public:
  ThrottledMock(double capacity, int burst_ticks) : capacity_(capacity), burst_ticks_(burst_ticks) {}
  ~ThrottledMock() override {
    stop_ = true;
    if (thread_.joinable()) thread_.join();
  }

  std::string name() const override { return "throttled-mock"; }
  std::string group() const override { return "throttled-mock"; }

  void start(const SutEnvironment& env) override {
    auto& topic = env.log.topic(env.input_topic);
    const Clock& clock = env.log.clock();
    thread_ = std::thread([this, &topic, &clock] { run(topic, clock); });
  }

  SutReport stop() override {
    stop_ = true;
    if (thread_.joinable()) thread_.join();
    SutReport r;
    r.totals.records_polled = consumed_;
    r.error = error_;
    return r;
  }

 private:
  void run(mlog::Topic& topic, const Clock& clock) {
    std::vector<mlog::PartitionId> parts(topic.partition_count());
    std::iota(parts.begin(), parts.end(), mlog::PartitionId{0});
    const double per_tick = capacity_ / 100.0;
    const double burst = per_tick * burst_ticks_;
    double credit = 0;
    TimestampMs last = clock.now_ms();
    try {
      while (!stop_) {
        clock.sleep_until(last + 10);
        const TimestampMs now = clock.now_ms();
        credit = std::min(burst, credit + per_tick * static_cast<double>(now - last) / 10.0);
        last = now;
        const auto want = static_cast<std::size_t>(std::floor(credit));
        if (want == 0) continue;
        auto batch = topic.poll(group(), parts, want);
        for (auto [p, off] : batch.commit_positions()) topic.commit(group(), p, off);
        credit -= static_cast<double>(batch.size());
        consumed_ += batch.size();
      }
    } catch (const std::exception& e) {
      error_ = e.what();
    }
  }

  double capacity_;
  int burst_ticks_;
  std::atomic<bool> stop_{false};
  std::uint64_t consumed_ = 0;
  std::optional<std::string> error_;
  std::thread thread_;
};

}  // namespace

SutFactory engine_factory(engine::EngineOptions options) {
  return [options](const BenchConfig& cfg) { return std::make_unique<EngineSystem>(cfg, options); };
}

SutFactory throttled_mock_factory(CapacityFn capacity, int burst_ticks) {
  return [capacity = std::move(capacity), burst_ticks](const BenchConfig& cfg) {
    return std::make_unique<ThrottledMock>(capacity(cfg), burst_ticks);
  };
}

}  // namespace shuffle::harness
