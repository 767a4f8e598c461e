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

#include "shuffle/engine/engine.h"

#include <algorithm>
#include <chrono>
#include <deque>
#include <stdexcept>

#include "shuffle/engine/output_event.h"

namespace shuffle::engine {

using namespace std::chrono_literals;

namespace {
constexpr std::size_t kDrainChunk = 4096;
}  // namespace

InstanceStats& InstanceStats::operator+=(const InstanceStats& o) {
  records_polled += o.records_polled;
  matches_emitted += o.matches_emitted;
  records_shuffled_in += o.records_shuffled_in;
  events_written += o.events_written;
  return *this;
}

InstanceStats EngineReport::totals() const {
  InstanceStats t;
  for (const auto& s : instances) t += s;
  return t;
}

struct Engine::Worker {
  Worker(std::uint32_t id, std::vector<mlog::PartitionId> parts, std::size_t inbox_capacity,
         std::size_t state_size)
      : id(id), partitions(std::move(parts)), inbox(inbox_capacity), store(state_size, id) {}

  struct PendingEvent {
    TimestampMs due;
    OutputEvent event;
  };

  std::uint32_t id;
  std::vector<mlog::PartitionId> partitions;
  ShuffleInbox inbox;
  ConsumerStateStore store;
  std::deque<PendingEvent> pending;
  std::vector<KeyedRecord> scratch;

  std::atomic<std::uint64_t> polled{0};
  std::atomic<std::uint64_t> matches{0};
  std::atomic<std::uint64_t> shuffled_in{0};
  std::atomic<std::uint64_t> written{0};
  std::optional<std::string> error;

  InstanceStats stats() const {
    return {polled.load(), matches.load(), shuffled_in.load(), written.load()};
  }
};

Engine::Engine(const BenchConfig& cfg, mlog::MessageLog& log, std::shared_ptr<const matcher::RuleSet> rules,
               EngineOptions options)
    : cfg_(cfg),
      log_(log),
      input_(log.topic(options.input_topic)),
      output_(log.topic(options.output_topic)),
      rules_(std::move(rules)),
      options_(std::move(options)) {
  if (!rules_) throw std::invalid_argument("engine needs a rule set");
  if (cfg_.output_ratio < 1) throw std::invalid_argument("output_ratio must be >= 1");
  if (options_.poll_batch == 0 || options_.output_batch == 0) throw std::invalid_argument("batch sizes must be >= 1");
  assignment_ = assign_partitions(static_cast<int>(input_.partition_count()), static_cast<int>(cfg_.num_instances));
  for (std::uint32_t i = 0; i < assignment_.size(); ++i) {
    workers_.push_back(std::make_unique<Worker>(i, assignment_[i].partitions(), options_.inbox_capacity,
                                                static_cast<std::size_t>(cfg_.state_size_bytes)));
  }
}

Engine::~Engine() {
  if (started_ && !joined_) {
    request_stop();
    join();
  }
}

void Engine::start() {
  if (started_) throw EngineError("engine already started");
  started_ = true;
  running_ = true;
  start_ts_ = log_.clock().now_ms();
  for (std::uint32_t i = 0; i < workers_.size(); ++i) threads_.emplace_back([this, i] { work(i); });
}

void Engine::request_stop() {
  stop_.store(true);
  for (auto& w : workers_) w->inbox.wake();
}

void Engine::fail(std::uint32_t self, const std::string& what) {
  workers_[self]->error = what;
  failed_.store(true);
  request_stop();
}

EngineReport Engine::join() {
  for (auto& t : threads_) {
    if (t.joinable()) t.join();
  }
  running_ = false;
  joined_ = true;
  EngineReport report;
  report.start_ts = start_ts_;
  report.end_ts = log_.clock().now_ms();
  report.wall_s = static_cast<double>(report.end_ts - report.start_ts) / 1000.0;
  for (const auto& w : workers_) {
    report.instances.push_back(w->stats());
    if (w->error && !report.error) report.error = "instance " + std::to_string(w->id) + ": " + *w->error;
  }
  return report;
}

bool Engine::quiescent() const {
  // Read in pipeline order: work only moves forward, so a record cannot slip
  // past all three checks unseen.
  return input_.lag(options_.group) == 0 && in_flight_.load() == 0 && pending_outputs_.load() == 0;
}

InstanceStats Engine::live_totals() const {
  InstanceStats t;
  for (const auto& w : workers_) t += w->stats();
  return t;
}

std::size_t Engine::drain_inbox(Worker& w, std::size_t max) {
  w.scratch.clear();
  const std::size_t n = w.inbox.take(w.scratch, max);
  if (n == 0) return 0;
  const auto instances = static_cast<std::uint32_t>(workers_.size());
  const TimestampMs due = options_.output_delay_ms > 0 ? log_.clock().now_ms() + options_.output_delay_ms : 0;
  for (const auto& rec : w.scratch) {
    if (route(rec.consumer_key, instances) != w.id) {
      throw EngineError("consumer " + std::to_string(rec.consumer_key) + " reached a non-owning instance");
    }
    auto r = aggregate(w.store.get(rec.consumer_key), rec, cfg_.output_ratio);
    w.store.put(rec.consumer_key, r.state);
    if (r.event) {
      pending_outputs_.fetch_add(1);
      w.pending.push_back({due, *r.event});
    }
  }
  w.scratch.clear();
  w.shuffled_in.fetch_add(n, std::memory_order_relaxed);
  in_flight_.fetch_sub(static_cast<std::int64_t>(n));
  return n;
}

bool Engine::hand_off(Worker& w, std::vector<std::vector<KeyedRecord>>& outgoing) {
  std::vector<std::size_t> sent(outgoing.size(), 0);
  for (;;) {
    bool done = true;
    bool moved = false;
    std::size_t blocked_on = 0;
    for (std::size_t d = 0; d < outgoing.size(); ++d) {
      auto& items = outgoing[d];
      if (sent[d] == items.size()) continue;
      const std::size_t k = workers_[d]->inbox.try_put(std::span(items).subspan(sent[d]));
      sent[d] += k;
      moved |= k > 0;
      if (sent[d] < items.size()) {
        done = false;
        blocked_on = d;
      }
    }
    if (done) break;
    if (stop_.load()) {
      std::int64_t dropped = 0;
      for (std::size_t d = 0; d < outgoing.size(); ++d) dropped += static_cast<std::int64_t>(outgoing[d].size() - sent[d]);
      in_flight_.fetch_sub(dropped);
      for (auto& items : outgoing) items.clear();
      return false;
    }
    // Keep our own inbox moving so peers blocked on us can progress.
    const bool drained = drain_inbox(w, kDrainChunk) > 0;
    flush_outputs(w, false);
    if (!moved && !drained) workers_[blocked_on]->inbox.wait_not_full(1ms);
  }
  for (auto& items : outgoing) items.clear();
  return true;
}

void Engine::flush_outputs(Worker& w, bool force) {
  if (w.pending.empty()) return;
  const TimestampMs now = options_.output_delay_ms > 0 ? log_.clock().now_ms() : 0;
  std::vector<std::array<std::byte, 8>> keys;
  std::vector<std::array<std::byte, kOutputEventBytes>> payloads;
  std::vector<mlog::KeyedPayload> batch;
  while (!w.pending.empty()) {
    keys.clear();
    payloads.clear();
    batch.clear();
    for (const auto& pe : w.pending) {
      if (keys.size() == options_.output_batch || (!force && pe.due > now)) break;
      keys.push_back(output_event_key(pe.event.consumer_key));
      payloads.push_back(encode_output_event(pe.event));
    }
    if (keys.empty()) return;
    for (std::size_t i = 0; i < keys.size(); ++i) batch.push_back({keys[i], payloads[i]});
    output_.append_keyed(batch);
    w.pending.erase(w.pending.begin(), w.pending.begin() + static_cast<std::ptrdiff_t>(keys.size()));
    w.written.fetch_add(keys.size(), std::memory_order_relaxed);
    pending_outputs_.fetch_sub(static_cast<std::int64_t>(keys.size()));
  }
}

void Engine::work(std::uint32_t self) {
  Worker& w = *workers_[self];
  const auto instances = static_cast<std::uint32_t>(workers_.size());
  std::vector<std::vector<KeyedRecord>> outgoing(instances);
  try {
    while (!stop_.load(std::memory_order_relaxed)) {
      bool progressed = drain_inbox(w, kDrainChunk) > 0;

      auto batch = input_.poll(options_.group, w.partitions, options_.poll_batch);
      if (!batch.empty()) {
        progressed = true;
        std::int64_t produced = 0;
        for (const auto& rec : batch) {
          for (auto& kr : flatmap_match(rec.payload, rec.append_ts, *rules_)) {
            outgoing[route(kr.consumer_key, instances)].push_back(std::move(kr));
            ++produced;
          }
        }
        w.polled.fetch_add(batch.size(), std::memory_order_relaxed);
        w.matches.fetch_add(static_cast<std::uint64_t>(produced), std::memory_order_relaxed);
        in_flight_.fetch_add(produced);
        if (!hand_off(w, outgoing)) break;
        for (auto [p, off] : batch.commit_positions()) input_.commit(options_.group, p, off);
      }

      flush_outputs(w, false);
      if (!progressed) w.inbox.wait_nonempty(1ms);
    }
    // Held-back events keep their delay on shutdown too; writing them early
    // would put latencies below the injected delay into the histogram.
    if (!w.pending.empty()) log_.clock().sleep_until(w.pending.back().due);
    flush_outputs(w, true);
  } catch (const mlog::LogClosedError& e) {
    // Expected when the harness closes the log to end a trial.
    if (!stop_.load()) fail(self, e.what());
  } catch (const std::exception& e) {
    fail(self, e.what());
  }
}

StateSnapshot Engine::snapshot_states() const {
  if (running_.load()) throw EngineError("snapshot_states called while the engine is running");
  StateSnapshot out;
  const auto instances = static_cast<std::uint32_t>(workers_.size());
  for (const auto& w : workers_) {
    w->store.for_each([&](std::uint64_t key, const ConsumerState& s) {
      if (route(key, instances) != w->id || w->store.owner_of(key) != w->id) {
        throw EngineError("consumer " + std::to_string(key) + " has state on a non-owning instance");
      }
      if (!out.emplace(key, s).second) {
        throw EngineError("consumer " + std::to_string(key) + " has state on more than one instance");
      }
    });
  }
  return out;
}

EngineReport run_pipeline(const BenchConfig& cfg, mlog::MessageLog& log,
                          std::shared_ptr<const matcher::RuleSet> rules, StopCondition stop,
                          EngineOptions options, bool snapshot) {
  Engine engine(cfg, log, std::move(rules), std::move(options));
  const Clock& clock = log.clock();
  engine.start();
  if (stop.mode == StopMode::Timed) {
    const TimestampMs end = clock.now_ms() + static_cast<TimestampMs>(stop.duration_s * 1000.0);
    for (TimestampMs now = clock.now_ms(); now < end && !engine.failed(); now = clock.now_ms()) {
      clock.sleep_until(std::min(end, now + 50));
    }
  } else {
    while (!engine.failed() && !engine.quiescent()) std::this_thread::sleep_for(1ms);
  }
  engine.request_stop();
  EngineReport report = engine.join();
  if (snapshot && !report.error) report.final_states = engine.snapshot_states();
  return report;
}

}  // namespace shuffle::engine
