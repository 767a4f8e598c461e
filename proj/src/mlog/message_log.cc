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

#include "shuffle/mlog/message_log.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <limits>
#include <numeric>
#include <ostream>

#include "shuffle/core/hash.h"

namespace shuffle::mlog {
namespace detail {

struct LogShared {
  std::shared_ptr<const Clock> clock;
  LogOptions options;
  std::atomic<std::size_t> retained_bytes{0};
  std::mutex budget_mu;
  std::condition_variable budget_cv;
  std::atomic<bool> closed{false};

  // Called before every append: rejects appends to a closed log and blocks
  // while the retention budget is exhausted.
  void wait_for_budget() {
    if (closed.load(std::memory_order_acquire)) throw LogClosedError("append to a closed log");
    const std::size_t limit = options.max_retained_bytes;
    if (limit == 0 || retained_bytes.load(std::memory_order_relaxed) <= limit) return;
    std::unique_lock lock(budget_mu);
    while (!closed.load(std::memory_order_acquire) && retained_bytes.load(std::memory_order_relaxed) > limit) {
      budget_cv.wait_for(lock, std::chrono::milliseconds(10));
    }
    if (closed.load(std::memory_order_acquire)) {
      throw LogClosedError("log closed while waiting for retention budget");
    }
  }

  void release(std::size_t bytes) {
    retained_bytes.fetch_sub(bytes, std::memory_order_relaxed);
    budget_cv.notify_all();
  }
};

struct Segment {
  explicit Segment(std::size_t cap) : data(new std::byte[cap]), capacity(cap) {}
  std::unique_ptr<std::byte[]> data;
  std::size_t capacity;
  std::size_t used = 0;
  Offset last_offset = -1;
};

struct Entry {
  TimestampMs ts;
  std::uint64_t segment;  // absolute segment id
  std::uint32_t pos;
  std::uint32_t len;
};

class Partition {
 public:
  Partition(PartitionId id, LogShared& shared) : id_(id), shared_(shared) {}

  AppendResult append(Bytes payload) {
    std::lock_guard lock(mu_);
    return append_locked(payload);
  }

  // Caller holds lock().
  AppendResult append_locked(Bytes payload) {
    Segment& seg = segment_for(payload.size());
    const auto pos = seg.used;
    if (!payload.empty()) std::memcpy(seg.data.get() + pos, payload.data(), payload.size());
    seg.used += payload.size();
    const Offset offset = base_ + static_cast<Offset>(entries_.size());
    seg.last_offset = offset;
    const TimestampMs ts = shared_.clock->now_ms();
    entries_.push_back(Entry{ts, first_segment_ + segments_.size() - 1, static_cast<std::uint32_t>(pos),
                             static_cast<std::uint32_t>(payload.size())});
    end_.store(offset + 1, std::memory_order_release);
    return AppendResult{id_, offset, ts};
  }

  void read_into(Offset from, std::size_t max, std::vector<std::shared_ptr<const void>>& pins,
                 std::vector<PolledRecord>& records) const {
    std::lock_guard lock(mu_);
    from = std::max(from, base_);
    const Offset end = base_ + static_cast<Offset>(entries_.size());
    const Offset stop = std::min<Offset>(end, from + static_cast<Offset>(max));
    const Segment* last_pinned = nullptr;
    for (Offset o = from; o < stop; ++o) {
      const Entry& e = entries_[static_cast<std::size_t>(o - base_)];
      const auto& seg = segments_[e.segment - first_segment_];
      if (seg.get() != last_pinned) {
        pins.push_back(seg);
        last_pinned = seg.get();
      }
      records.push_back(PolledRecord{id_, o, e.ts, Bytes(seg->data.get() + e.pos, e.len)});
    }
  }

  // Drops entries below `upto` and any segment holding only dropped entries.
  void trim_before(Offset upto) {
    std::size_t released = 0;
    {
      std::lock_guard lock(mu_);
      while (!entries_.empty() && base_ < upto) {
        entries_.pop_front();
        ++base_;
      }
      while (segments_.size() > 1 && segments_.front()->last_offset < base_) {
        released += segments_.front()->capacity;
        segments_.pop_front();
        ++first_segment_;
      }
    }
    if (released > 0) shared_.release(released);
  }

  Offset end() const { return end_.load(std::memory_order_acquire); }
  std::mutex& lock() { return mu_; }

 private:
  Segment& segment_for(std::size_t len) {
    if (segments_.empty() || segments_.back()->capacity - segments_.back()->used < len) {
      const std::size_t cap = std::max(shared_.options.segment_bytes, len);
      segments_.push_back(std::make_shared<Segment>(cap));
      shared_.retained_bytes.fetch_add(cap, std::memory_order_relaxed);
    }
    return *segments_.back();
  }

  const PartitionId id_;
  LogShared& shared_;
  mutable std::mutex mu_;
  std::deque<Entry> entries_;
  std::deque<std::shared_ptr<Segment>> segments_;
  std::uint64_t first_segment_ = 0;
  Offset base_ = 0;
  std::atomic<Offset> end_{0};
};

struct GroupState {
  explicit GroupState(std::size_t partitions) : committed(partitions) {
    for (auto& c : committed) c.store(0, std::memory_order_relaxed);
  }
  std::vector<std::atomic<Offset>> committed;
};

}  // namespace detail

std::vector<std::pair<PartitionId, Offset>> PollBatch::commit_positions() const {
  std::vector<std::pair<PartitionId, Offset>> out;
  for (const auto& r : records_) {
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& p) { return p.first == r.partition; });
    if (it == out.end()) {
      out.emplace_back(r.partition, r.offset + 1);
    } else {
      it->second = std::max(it->second, r.offset + 1);
    }
  }
  return out;
}

Topic::Topic(std::string name, PartitionId partitions, std::shared_ptr<detail::LogShared> shared)
    : name_(std::move(name)), shared_(std::move(shared)) {
  partitions_.reserve(partitions);
  for (PartitionId p = 0; p < partitions; ++p) {
    partitions_.push_back(std::make_unique<detail::Partition>(p, *shared_));
  }
}

Topic::~Topic() = default;

detail::Partition& Topic::partition(PartitionId p) const {
  if (p >= partitions_.size()) {
    throw std::out_of_range("topic '" + name_ + "' has no partition " + std::to_string(p));
  }
  return *partitions_[p];
}

PartitionId Topic::partition_for_key(Bytes key) const {
  return static_cast<PartitionId>(xxh64(key) % partitions_.size());
}

AppendResult Topic::append(PartitionId p, Bytes payload) {
  auto& part = partition(p);
  shared_->wait_for_budget();
  return part.append(payload);
}

AppendResult Topic::append(std::optional<Bytes> key, Bytes payload) {
  const PartitionId p = key ? partition_for_key(*key)
                            : static_cast<PartitionId>(round_robin_.fetch_add(1, std::memory_order_relaxed) %
                                                       partitions_.size());
  return append(p, payload);
}

std::vector<AppendResult> Topic::append_keyed(std::span<const KeyedPayload> items) {
  std::vector<PartitionId> target(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) target[i] = partition_for_key(items[i].key);
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return target[a] < target[b]; });

  shared_->wait_for_budget();
  std::vector<AppendResult> results(items.size());
  std::size_t i = 0;
  while (i < order.size()) {
    const PartitionId p = target[order[i]];
    auto& part = *partitions_[p];
    std::lock_guard lock(part.lock());
    for (; i < order.size() && target[order[i]] == p; ++i) {
      results[order[i]] = part.append_locked(items[order[i]].payload);
    }
  }
  return results;
}

PollBatch Topic::read(PartitionId p, Offset from, std::size_t max_records) const {
  PollBatch batch;
  partition(p).read_into(from, max_records, batch.pins_, batch.records_);
  return batch;
}

PollBatch Topic::poll(std::string_view group, std::span<const PartitionId> partitions,
                      std::size_t max_records) {
  for (PartitionId p : partitions) partition(p);  // validates
  auto& state = group_state(group);
  PollBatch batch;
  if (partitions.empty() || max_records == 0) return batch;

  const std::size_t quota = (max_records + partitions.size() - 1) / partitions.size();
  for (PartitionId p : partitions) {
    const std::size_t remaining = max_records - batch.records_.size();
    if (remaining == 0) break;
    const Offset from = state.committed[p].load(std::memory_order_acquire);
    partitions_[p]->read_into(from, std::min(quota, remaining), batch.pins_, batch.records_);
  }
  return batch;
}

void Topic::commit(std::string_view group, PartitionId p, Offset offset) {
  auto& part = partition(p);
  const Offset end = part.end();
  if (offset < 0 || offset > end) {
    throw OffsetOutOfRangeError("commit of offset " + std::to_string(offset) + " on " + name_ + "/" +
                                std::to_string(p) + " outside [0, " + std::to_string(end) + "]");
  }
  auto& committed = group_state(group).committed[p];
  Offset cur = committed.load(std::memory_order_relaxed);
  while (cur < offset && !committed.compare_exchange_weak(cur, offset, std::memory_order_acq_rel)) {
  }
  if (shared_->options.reclaim_committed) reclaim(p);
}

void Topic::reclaim(PartitionId p) {
  Offset upto = std::numeric_limits<Offset>::max();
  {
    std::shared_lock lock(groups_mu_);
    if (groups_.empty()) return;
    for (const auto& [_, g] : groups_) upto = std::min(upto, g->committed[p].load(std::memory_order_acquire));
  }
  partitions_[p]->trim_before(upto);
}

std::vector<Offset> Topic::end_offsets() const {
  std::vector<Offset> out;
  out.reserve(partitions_.size());
  for (const auto& p : partitions_) out.push_back(p->end());
  return out;
}

Offset Topic::end_total() const {
  Offset total = 0;
  for (const auto& p : partitions_) total += p->end();
  return total;
}

std::vector<Offset> Topic::committed_offsets(std::string_view group) const {
  std::vector<Offset> out(partitions_.size(), 0);
  if (const auto* g = find_group(group)) {
    for (std::size_t p = 0; p < out.size(); ++p) out[p] = g->committed[p].load(std::memory_order_acquire);
  }
  return out;
}

Offset Topic::committed_total(std::string_view group) const {
  const auto offsets = committed_offsets(group);
  return std::accumulate(offsets.begin(), offsets.end(), Offset{0});
}

Offset Topic::lag(std::string_view group) const {
  const auto* g = find_group(group);
  Offset total = 0;
  for (std::size_t p = 0; p < partitions_.size(); ++p) {
    // Committed first: it can only trail the end offset read afterwards.
    const Offset committed = g ? g->committed[p].load(std::memory_order_acquire) : 0;
    total += partitions_[p]->end() - committed;
  }
  return total;
}

detail::GroupState& Topic::group_state(std::string_view group) {
  {
    std::shared_lock lock(groups_mu_);
    auto it = groups_.find(group);
    if (it != groups_.end()) return *it->second;
  }
  std::unique_lock lock(groups_mu_);
  auto [it, inserted] = groups_.try_emplace(std::string(group), nullptr);
  if (inserted) it->second = std::make_unique<detail::GroupState>(partitions_.size());
  return *it->second;
}

const detail::GroupState* Topic::find_group(std::string_view group) const {
  std::shared_lock lock(groups_mu_);
  auto it = groups_.find(group);
  return it == groups_.end() ? nullptr : it->second.get();
}

MessageLog::MessageLog(std::shared_ptr<const Clock> clock, LogOptions options)
    : shared_(std::make_shared<detail::LogShared>()) {
  if (!clock) throw std::invalid_argument("MessageLog requires a clock");
  shared_->clock = std::move(clock);
  shared_->options = options;
}

MessageLog::~MessageLog() { close(); }

Topic& MessageLog::create_topic(const std::string& name, int partitions) {
  if (partitions <= 0) {
    throw std::invalid_argument("topic '" + name + "' needs at least one partition");
  }
  std::unique_lock lock(topics_mu_);
  auto [it, inserted] = topics_.try_emplace(name, nullptr);
  if (!inserted) throw DuplicateTopicError("topic '" + name + "' already exists");
  it->second = std::make_unique<Topic>(name, static_cast<PartitionId>(partitions), shared_);
  return *it->second;
}

Topic& MessageLog::topic(std::string_view name) const {
  std::shared_lock lock(topics_mu_);
  auto it = topics_.find(name);
  if (it == topics_.end()) throw UnknownTopicError("unknown topic '" + std::string(name) + "'");
  return *it->second;
}

bool MessageLog::has_topic(std::string_view name) const {
  std::shared_lock lock(topics_mu_);
  return topics_.find(name) != topics_.end();
}

const Clock& MessageLog::clock() const { return *shared_->clock; }

std::size_t MessageLog::retained_bytes() const {
  return shared_->retained_bytes.load(std::memory_order_relaxed);
}

void MessageLog::close() {
  {
    std::lock_guard lock(shared_->budget_mu);
    shared_->closed.store(true, std::memory_order_release);
  }
  shared_->budget_cv.notify_all();
}

Producer::Producer(Topic& topic, PartitionId first_partition)
    : topic_(&topic), next_(first_partition % topic.partition_count()) {}

AppendResult Producer::send(Bytes payload) {
  const PartitionId p = next_;
  next_ = (next_ + 1) % topic_->partition_count();
  return topic_->append(p, payload);
}

AppendResult Producer::send_keyed(Bytes key, Bytes payload) { return topic_->append(key, payload); }

void dump_partition_csv(const Topic& topic, PartitionId partition, std::ostream& out) {
  out << "offset,append_ts,payload_xxh64\n";
  const Offset end = topic.end_offsets().at(partition);
  for (Offset next = 0; next < end;) {
    const auto batch = topic.read(partition, next, 4096);
    if (batch.empty()) break;
    for (const auto& r : batch) {
      char hex[17];
      std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(xxh64(r.payload)));
      out << r.offset << ',' << r.append_ts << ',' << hex << '\n';
      next = r.offset + 1;
    }
  }
}

}  // namespace shuffle::mlog
