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

// In-process partitioned append-only log with consumer groups.
//
// A MessageLog owns named topics. Each topic has a fixed number of
// partitions; each partition is an append-only sequence of entries with dense
// offsets 0, 1, 2, ... and an append timestamp taken from the log's clock.
// Consumer groups track one committed offset per partition: the offset of the
// next entry the group has not yet acknowledged. Lag is the sum over
// partitions of end offset minus committed offset.
//
// Thread-safety: appends, polls and commits may be issued from any thread.
// Each partition serializes its appends under a short mutex; end offsets and
// committed offsets are atomics, so lag and offset reads never block.

#pragma once

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "shuffle/core/clock.h"

namespace shuffle::mlog {

using PartitionId = std::uint32_t;
using Offset = std::int64_t;
using Bytes = std::span<const std::byte>;

class LogError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownTopicError : public LogError {
 public:
  using LogError::LogError;
};

class DuplicateTopicError : public LogError {
 public:
  using LogError::LogError;
};

class OffsetOutOfRangeError : public LogError {
 public:
  using LogError::LogError;
};

// Thrown by appends to a closed log, including appenders blocked on the
// retention budget when close() is called.
class LogClosedError : public LogError {
 public:
  using LogError::LogError;
};

struct LogOptions {
  // Release entries that every registered group of the topic has committed.
  // Off by default: the log then retains everything for its lifetime.
  bool reclaim_committed = false;
  // Appends block while retained payload bytes exceed this budget. 0 = no limit.
  std::size_t max_retained_bytes = 0;
  // Payload bytes are packed into segments of this size.
  std::size_t segment_bytes = std::size_t{4} << 20;
};

struct AppendResult {
  PartitionId partition;
  Offset offset;
  TimestampMs append_ts;
};

struct PolledRecord {
  PartitionId partition;
  Offset offset;
  TimestampMs append_ts;
  Bytes payload;  // valid while the owning PollBatch is alive
};

// Records returned by a read; keeps the underlying storage alive.
class PollBatch {
 public:
  const std::vector<PolledRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  auto begin() const { return records_.begin(); }
  auto end() const { return records_.end(); }

  // (partition, last returned offset + 1) for every partition in the batch.
  std::vector<std::pair<PartitionId, Offset>> commit_positions() const;

 private:
  friend class Topic;
  std::vector<PolledRecord> records_;
  std::vector<std::shared_ptr<const void>> pins_;
};

struct KeyedPayload {
  Bytes key;
  Bytes payload;
};

namespace detail {
struct LogShared;
class Partition;
struct GroupState;
}  // namespace detail

class Topic {
 public:
  Topic(std::string name, PartitionId partitions, std::shared_ptr<detail::LogShared> shared);
  ~Topic();
  Topic(const Topic&) = delete;
  Topic& operator=(const Topic&) = delete;

  const std::string& name() const { return name_; }
  PartitionId partition_count() const { return static_cast<PartitionId>(partitions_.size()); }

  // Partition a keyed append lands in: xxh64(key) mod partition_count.
  PartitionId partition_for_key(Bytes key) const;

  AppendResult append(PartitionId partition, Bytes payload);

  // Keyed appends go to partition_for_key(key); keyless appends rotate
  // round-robin through the partitions (use Producer for per-producer order).
  AppendResult append(std::optional<Bytes> key, Bytes payload);

  // Appends all items, taking each partition's lock once.
  std::vector<AppendResult> append_keyed(std::span<const KeyedPayload> items);

  // Up to `max_records` entries of one partition starting at `from` (clamped
  // to the first retained offset). Does not involve consumer groups.
  PollBatch read(PartitionId partition, Offset from, std::size_t max_records) const;

  // Entries at or after the group's committed offsets of the given
  // partitions, at most `max_records` in total, in per-partition offset order.
  // Unknown groups are created with all offsets at 0. Does not commit.
  PollBatch poll(std::string_view group, std::span<const PartitionId> partitions,
                 std::size_t max_records);

  // committed := max(committed, offset). Throws OffsetOutOfRangeError when
  // offset is negative or beyond the partition's end offset.
  void commit(std::string_view group, PartitionId partition, Offset offset);

  std::vector<Offset> end_offsets() const;
  Offset end_total() const;

  // Zeros for a group that has never polled or committed.
  std::vector<Offset> committed_offsets(std::string_view group) const;
  Offset committed_total(std::string_view group) const;

  // Sum over partitions of end - committed. Per-partition consistent snapshot.
  Offset lag(std::string_view group) const;

 private:
  detail::GroupState& group_state(std::string_view group);
  const detail::GroupState* find_group(std::string_view group) const;
  void reclaim(PartitionId partition);
  detail::Partition& partition(PartitionId p) const;

  std::string name_;
  std::shared_ptr<detail::LogShared> shared_;
  std::vector<std::unique_ptr<detail::Partition>> partitions_;
  std::atomic<std::uint64_t> round_robin_{0};

  mutable std::shared_mutex groups_mu_;
  std::map<std::string, std::unique_ptr<detail::GroupState>, std::less<>> groups_;
};

class MessageLog {
 public:
  explicit MessageLog(std::shared_ptr<const Clock> clock, LogOptions options = {});
  ~MessageLog();
  MessageLog(const MessageLog&) = delete;
  MessageLog& operator=(const MessageLog&) = delete;

  // Throws std::invalid_argument for zero partitions, DuplicateTopicError
  // when the name is taken.
  Topic& create_topic(const std::string& name, int partitions);
  Topic& topic(std::string_view name) const;
  bool has_topic(std::string_view name) const;

  const Clock& clock() const;
  std::size_t retained_bytes() const;

  // Rejects further appends with LogClosedError and wakes appenders blocked
  // on the retention budget. Reads and commits keep working.
  void close();

 private:
  std::shared_ptr<detail::LogShared> shared_;
  mutable std::shared_mutex topics_mu_;
  std::map<std::string, std::unique_ptr<Topic>, std::less<>> topics_;
};

// Keyless appends rotate over partitions in a per-producer sequence starting
// at `first_partition`.
class Producer {
 public:
  explicit Producer(Topic& topic, PartitionId first_partition = 0);

  AppendResult send(Bytes payload);
  AppendResult send_keyed(Bytes key, Bytes payload);

  Topic& topic() const { return *topic_; }

 private:
  Topic* topic_;
  PartitionId next_;
};

// Debug view of one partition: "offset,append_ts,payload_xxh64" rows (hash
// as 16 lowercase hex digits) from the first retained offset to the end.
void dump_partition_csv(const Topic& topic, PartitionId partition, std::ostream& out);

}  // namespace shuffle::mlog
