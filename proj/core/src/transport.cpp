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

#include "allnode/transport.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "transport_impl.hpp"

namespace allnode {

std::string_view tag_name(Tag tag) {
  switch (tag) {
    case Tag::IdRequest: return "IdRequest";
    case Tag::FeatureBlock: return "FeatureBlock";
    case Tag::PartialResult: return "PartialResult";
    case Tag::AttnBlock: return "AttnBlock";
    case Tag::EdgeShuffle: return "EdgeShuffle";
    case Tag::Control: return "Control";
  }
  return "?";
}

std::size_t elem_width(ElemKind kind) {
  switch (kind) {
    case ElemKind::U32: return 4;
    case ElemKind::U64: return 8;
    case ElemKind::F32: return 4;
    case ElemKind::F64: return 8;
  }
  return 1;
}

Payload encode_ids(std::span<const NodeId> ids, std::uint64_t node_count) {
  if (node_count <= std::numeric_limits<std::uint32_t>::max()) {
    std::vector<std::uint32_t> narrow(ids.begin(), ids.end());
    return Payload::of(narrow);
  }
  return Payload::of(ids);
}

std::vector<NodeId> decode_ids(const Payload& payload) {
  if (payload.kind() == ElemKind::U32) {
    auto narrow = payload.to<std::uint32_t>();
    return {narrow.begin(), narrow.end()};
  }
  if (payload.kind() == ElemKind::U64) return payload.to<std::uint64_t>();
  if (payload.entries() == 0) return {};
  throw TransportError("id payload must hold unsigned integers");
}

TagCounters& TagCounters::operator+=(const TagCounters& o) {
  sent_bytes += o.sent_bytes;
  recv_bytes += o.recv_bytes;
  sent_entries += o.sent_entries;
  recv_entries += o.recv_entries;
  return *this;
}

TrafficStats::TrafficStats(int machines)
    : counters_(static_cast<std::size_t>(std::max(machines, 0))) {}

void TrafficStats::record(int src, int dst, Tag tag, std::uint64_t bytes, std::uint64_t entries) {
  const auto t = static_cast<std::size_t>(tag);
  auto& s = counters_.at(static_cast<std::size_t>(src))[t];
  s.sent_bytes += bytes;
  s.sent_entries += entries;
  auto& r = counters_.at(static_cast<std::size_t>(dst))[t];
  r.recv_bytes += bytes;
  r.recv_entries += entries;
}

const TagCounters& TrafficStats::at(int machine, Tag tag) const {
  return counters_.at(static_cast<std::size_t>(machine))[static_cast<std::size_t>(tag)];
}

TagCounters TrafficStats::machine_total(int machine) const {
  TagCounters sum;
  for (const auto& c : counters_.at(static_cast<std::size_t>(machine))) sum += c;
  return sum;
}

TagCounters TrafficStats::tag_total(Tag tag) const {
  TagCounters sum;
  for (const auto& per : counters_) sum += per[static_cast<std::size_t>(tag)];
  return sum;
}

TagCounters TrafficStats::total() const {
  TagCounters sum;
  for (int m = 0; m < machines(); ++m) sum += machine_total(m);
  return sum;
}

bool TrafficStats::conserved() const {
  for (std::size_t t = 0; t < kTagCount; ++t) {
    const auto c = tag_total(static_cast<Tag>(t));
    if (c.sent_bytes != c.recv_bytes || c.sent_entries != c.recv_entries) return false;
  }
  return true;
}

bool TrafficStats::same_entries(const TrafficStats& other) const {
  if (machines() != other.machines()) return false;
  for (int m = 0; m < machines(); ++m) {
    for (std::size_t t = 0; t < kTagCount; ++t) {
      const auto& a = at(m, static_cast<Tag>(t));
      const auto& b = other.at(m, static_cast<Tag>(t));
      if (a.sent_entries != b.sent_entries || a.recv_entries != b.recv_entries) return false;
    }
  }
  return true;
}

std::string TrafficStats::to_csv() const {
  std::ostringstream out;
  out << "machine,tag,sent_bytes,recv_bytes,sent_entries,recv_entries\n";
  for (int m = 0; m < machines(); ++m) {
    for (std::size_t t = 0; t < kTagCount; ++t) {
      const auto& c = at(m, static_cast<Tag>(t));
      out << m << ',' << tag_name(static_cast<Tag>(t)) << ',' << c.sent_bytes << ','
          << c.recv_bytes << ',' << c.sent_entries << ',' << c.recv_entries << '\n';
    }
  }
  return out.str();
}

TrafficStats& TrafficStats::operator+=(const TrafficStats& other) {
  if (counters_.empty()) counters_.resize(other.counters_.size());
  if (other.counters_.size() != counters_.size()) {
    throw ShapeError("cannot merge traffic of different machine counts");
  }
  for (std::size_t m = 0; m < counters_.size(); ++m) {
    for (std::size_t t = 0; t < kTagCount; ++t) counters_[m][t] += other.counters_[m][t];
  }
  return *this;
}

void SimParams::validate() const {
  if (!(latency > 0.0) || !(bandwidth > 0.0) || compute_time_per_op < 0.0) {
    throw UnsupportedError("SimParams need positive latency and bandwidth");
  }
}

std::string_view transport_name(TransportKind kind) {
  return kind == TransportKind::Threads ? "threads" : "sim";
}

TransportKind parse_transport(std::string_view name) {
  if (name == "threads") return TransportKind::Threads;
  if (name == "sim" || name == "simulated") return TransportKind::Simulated;
  throw UnsupportedError("unknown transport '" + std::string(name) + "'");
}

std::unique_ptr<Transport> make_transport(TransportKind kind, int machines,
                                          const SimParams& params) {
  if (machines < 1) throw BoundsError("a run needs at least one machine");
  if (kind == TransportKind::Threads) return detail::make_thread_transport(machines);
  params.validate();
  return detail::make_sim_transport(machines, params);
}

Channel::Channel(Channel&& other) noexcept
    : worker_(other.worker_),
      id_(other.id_),
      served_(std::move(other.served_)),
      closed_(other.closed_) {
  other.closed_ = true;
  other.served_.clear();
}

Channel::~Channel() { drop_services(); }

void Channel::drop_services() noexcept {
  for (Tag t : served_) {
    try {
      worker_->transport().unserve(worker_->id(), t, id_);
    } catch (...) {
    }
  }
  served_.clear();
}

void Channel::send(int dst, Tag tag, Payload payload) {
  Message msg;
  msg.tag = tag;
  msg.src = worker_->id();
  msg.dst = dst;
  msg.channel = id_;
  msg.payload = std::move(payload);
  worker_->transport().send(std::move(msg));
}

Message Channel::recv(int src, Tag tag) {
  return worker_->transport().recv(worker_->id(), src, tag, id_);
}

void Channel::serve(Tag request, Tag response, Handler handler) {
  worker_->transport().serve(worker_->id(), request, response, id_, std::move(handler));
  served_.push_back(request);
}

void Channel::close() {
  if (closed_) return;
  closed_ = true;
  worker_->barrier();
  drop_services();
}

void Worker::track_inflight(std::int64_t delta) {
  inflight_ += delta;
  if (inflight_ < 0) throw IntegrityError("in-flight receive buffer accounting went negative");
  peak_inflight_ = std::max(peak_inflight_, static_cast<std::uint64_t>(inflight_));
}

namespace detail {

void rethrow_root_failure(int machine, std::exception_ptr error) {
  try {
    std::rethrow_exception(error);
  } catch (const DeadlockError&) {
    throw;
  } catch (const std::exception& e) {
    throw WorkerFailure(machine, error, e.what());
  } catch (...) {
    throw WorkerFailure(machine, error, "unknown exception");
  }
}

}  // namespace detail

}  // namespace allnode
