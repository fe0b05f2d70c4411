/*
 * Copyright 2026 The allnode Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <exception>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

#include "allnode/error.hpp"
#include "allnode/graph.hpp"
#include "allnode/partition.hpp"

namespace allnode {

enum class Tag : std::uint8_t {
  IdRequest,
  FeatureBlock,
  PartialResult,
  AttnBlock,
  EdgeShuffle,
  Control,
};
inline constexpr std::size_t kTagCount = 6;
std::string_view tag_name(Tag tag);

enum class ElemKind : std::uint8_t { U32, U64, F32, F64 };
std::size_t elem_width(ElemKind kind);

template <typename T>
constexpr ElemKind elem_kind_of() {
  if constexpr (std::is_same_v<T, std::uint32_t>) return ElemKind::U32;
  else if constexpr (std::is_same_v<T, std::uint64_t>) return ElemKind::U64;
  else if constexpr (std::is_same_v<T, float>) return ElemKind::F32;
  else {
    static_assert(std::is_same_v<T, double>, "unsupported payload element type");
    return ElemKind::F64;
  }
}

/// Typed byte sequence. Traffic accounting counts entries (logical ids or
/// scalars) and their bytes; framing is never counted.
class Payload {
 public:
  Payload() = default;

  template <typename T>
  static Payload of(std::span<const T> values) {
    Payload p;
    p.kind_ = elem_kind_of<T>();
    p.bytes_.resize(values.size_bytes());
    if (!values.empty()) std::memcpy(p.bytes_.data(), values.data(), values.size_bytes());
    return p;
  }
  template <typename T>
  static Payload of(const std::vector<T>& values) {
    return of(std::span<const T>(values));
  }

  /// Copies the entries out; throws TransportError on an element-kind mismatch.
  template <typename T>
  std::vector<T> to() const {
    if (!bytes_.empty() && kind_ != elem_kind_of<T>()) {
      throw TransportError("payload element kind mismatch");
    }
    std::vector<T> out(bytes_.size() / sizeof(T));
    if (!out.empty()) std::memcpy(out.data(), bytes_.data(), bytes_.size());
    return out;
  }

  ElemKind kind() const noexcept { return kind_; }
  std::uint64_t bytes() const noexcept { return bytes_.size(); }
  std::uint64_t entries() const noexcept { return bytes_.size() / elem_width(kind_); }

 private:
  ElemKind kind_ = ElemKind::U32;
  std::vector<std::byte> bytes_;
};

/// Node ids travel as 4-byte values when the id space fits, else 8-byte.
Payload encode_ids(std::span<const NodeId> ids, std::uint64_t node_count);
std::vector<NodeId> decode_ids(const Payload& payload);

using ChannelId = std::uint32_t;

struct Message {
  Tag tag = Tag::Control;
  int src = 0;
  int dst = 0;
  ChannelId channel = 0;
  Payload payload;
};

struct TagCounters {
  std::uint64_t sent_bytes = 0;
  std::uint64_t recv_bytes = 0;
  std::uint64_t sent_entries = 0;
  std::uint64_t recv_entries = 0;

  TagCounters& operator+=(const TagCounters& o);
  friend bool operator==(const TagCounters&, const TagCounters&) = default;
};

/// Per-machine, per-tag payload counters.
class TrafficStats {
 public:
  explicit TrafficStats(int machines = 0);

  void record(int src, int dst, Tag tag, std::uint64_t bytes, std::uint64_t entries);

  int machines() const noexcept { return static_cast<int>(counters_.size()); }
  const TagCounters& at(int machine, Tag tag) const;
  TagCounters machine_total(int machine) const;
  TagCounters tag_total(Tag tag) const;
  TagCounters total() const;

  /// Sum of sent equals sum of received, per tag, for bytes and entries.
  bool conserved() const;

  /// Entry counts only, for cross-transport comparison.
  bool same_entries(const TrafficStats& other) const;

  /// machine,tag,sent_bytes,recv_bytes,sent_entries,recv_entries
  std::string to_csv() const;

  TrafficStats& operator+=(const TrafficStats& other);

 private:
  std::vector<std::array<TagCounters, kTagCount>> counters_;
};

/// Timing model of the simulated transport. A message of b bytes occupies its
/// (src, dst) link for latency + b / bandwidth; links are independent.
/// compute(ops) advances the caller's clock by ops * compute_time_per_op.
struct SimParams {
  double latency = 1.0;
  double bandwidth = 1000.0;
  double compute_time_per_op = 0.0;

  void validate() const;
};

enum class TransportKind { Threads, Simulated };
std::string_view transport_name(TransportKind kind);
TransportKind parse_transport(std::string_view name);

/// Turns a request payload into the response payload. Runs on the owner's
/// behalf outside the owner's program flow, like a progress thread.
using Handler = std::function<Payload(const Message&)>;

/// Message fabric shared by all logical machines of one run.
class Transport {
 public:
  virtual ~Transport() = default;

  virtual int machines() const = 0;

  /// Asynchronous; never blocks the sender.
  virtual void send(Message msg) = 0;
  /// Blocks until the next message from src with this tag and channel arrives.
  virtual Message recv(int self, int src, Tag tag, ChannelId channel) = 0;
  /// Requests (tag, channel) addressed to self are answered by `handler`; the
  /// response goes back to the requester with `response`. Requests that
  /// arrived before registration are answered in arrival order.
  virtual void serve(int self, Tag request, Tag response, ChannelId channel, Handler handler) = 0;
  virtual void unserve(int self, Tag request, ChannelId channel) = 0;
  virtual void barrier(int self) = 0;
  virtual void compute(int self, double ops) = 0;
  virtual double now(int self) const = 0;

  virtual void worker_begin(int self) = 0;
  virtual void worker_end(int self) = 0;
  virtual void worker_fail(int self, std::exception_ptr error) = 0;

  virtual TrafficStats stats() const = 0;
  virtual double makespan() const = 0;

  /// First failure recorded during the run, if any.
  virtual std::optional<std::pair<int, std::exception_ptr>> root_failure() const = 0;
};

std::unique_ptr<Transport> make_transport(TransportKind kind, int machines,
                                          const SimParams& params = {});

class Worker;

/// A numbered conversation between workers. Each primitive invocation opens
/// its own channel so that messages of consecutive primitives never mix.
class Channel {
 public:
  Channel(Worker& worker, ChannelId id) : worker_(&worker), id_(id) {}
  Channel(const Channel&) = delete;
  Channel& operator=(const Channel&) = delete;
  Channel(Channel&& other) noexcept;
  Channel& operator=(Channel&&) = delete;
  ~Channel();

  ChannelId id() const noexcept { return id_; }
  Worker& worker() noexcept { return *worker_; }

  void send(int dst, Tag tag, Payload payload);
  Message recv(int src, Tag tag);
  void serve(Tag request, Tag response, Handler handler);

  /// Global barrier followed by removal of this channel's handlers. Handlers
  /// may reference data that only lives until close() returns.
  void close();

 private:
  void drop_services() noexcept;

  Worker* worker_;
  ChannelId id_;
  std::vector<Tag> served_;
  bool closed_ = false;
};

/// Per-machine view of a run: identity, grid position and communication.
class Worker {
 public:
  Worker(Transport& transport, const GridConfig& grid, int id)
      : transport_(&transport), grid_(grid), id_(id), coord_(grid.coord(id)) {}

  int id() const noexcept { return id_; }
  int p() const noexcept { return coord_.p; }
  int m() const noexcept { return coord_.m; }
  const GridConfig& grid() const noexcept { return grid_; }
  Transport& transport() noexcept { return *transport_; }

  Channel open_channel() { return Channel(*this, next_channel_++); }
  void compute(double ops) { transport_->compute(id_, ops); }
  void barrier() { transport_->barrier(id_); }
  double now() const { return transport_->now(id_); }

  /// Receive-buffer bookkeeping: entries reserved for data in flight towards
  /// this machine and not yet consumed.
  void track_inflight(std::int64_t delta);
  std::int64_t inflight() const noexcept { return inflight_; }
  std::uint64_t peak_inflight() const noexcept { return peak_inflight_; }

 private:
  Transport* transport_;
  GridConfig grid_;
  int id_;
  GridCoord coord_;
  ChannelId next_channel_ = 1;
  std::int64_t inflight_ = 0;
  std::uint64_t peak_inflight_ = 0;
};

struct RunOptions {
  TransportKind kind = TransportKind::Simulated;
  SimParams sim;
};

template <typename Out>
struct RunResult {
  std::vector<Out> outputs;
  TrafficStats stats;
  double makespan = 0.0;
  std::vector<std::uint64_t> peak_inflight;
};

namespace detail {
[[noreturn]] void rethrow_root_failure(int machine, std::exception_ptr error);
}

/// Runs program(worker) once per machine of the grid, each on its own logical
/// machine, and collects outputs indexed by machine id. A failing worker
/// aborts the run; the failure is rethrown as WorkerFailure (DeadlockError is
/// rethrown as is).
template <typename Program>
auto run_workers(const GridConfig& grid, Program&& program, const RunOptions& options = {})
    -> RunResult<std::invoke_result_t<Program&, Worker&>> {
  using Out = std::invoke_result_t<Program&, Worker&>;
  static_assert(!std::is_void_v<Out>, "worker programs must return a value");
  grid.validate();
  const int n = grid.machines();
  auto transport = make_transport(options.kind, n, options.sim);

  std::vector<std::optional<Out>> outputs(static_cast<std::size_t>(n));
  std::vector<std::uint64_t> peaks(static_cast<std::size_t>(n), 0);
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(n));
  for (int id = 0; id < n; ++id) {
    threads.emplace_back([&, id] {
      Worker worker(*transport, grid, id);
      try {
        transport->worker_begin(id);
        outputs[static_cast<std::size_t>(id)].emplace(program(worker));
        peaks[static_cast<std::size_t>(id)] = worker.peak_inflight();
        transport->worker_end(id);
      } catch (...) {
        transport->worker_fail(id, std::current_exception());
      }
    });
  }
  for (auto& t : threads) t.join();

  if (auto failure = transport->root_failure()) {
    detail::rethrow_root_failure(failure->first, failure->second);
  }
  RunResult<Out> result;
  result.outputs.reserve(static_cast<std::size_t>(n));
  for (auto& o : outputs) result.outputs.push_back(std::move(*o));
  result.stats = transport->stats();
  result.makespan = transport->makespan();
  result.peak_inflight = std::move(peaks);
  return result;
}

}  // namespace allnode
