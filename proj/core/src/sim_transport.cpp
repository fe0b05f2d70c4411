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

#include <algorithm>
#include <condition_variable>
#include <deque>
#include <limits>
#include <map>
#include <mutex>
#include <queue>

#include "transport_impl.hpp"

namespace allnode::detail {
namespace {

constexpr double kNever = std::numeric_limits<double>::infinity();

// Discrete-event fabric. Worker threads pass a single baton: exactly one of
// them executes program code at a time, always the one with the smallest
// virtual clock, so runs are deterministic and independent of OS scheduling.
class SimTransport final : public Transport {
 public:
  SimTransport(int machines, const SimParams& params)
      : n_(machines),
        params_(params),
        procs_(static_cast<std::size_t>(machines)),
        link_free_(static_cast<std::size_t>(machines) * static_cast<std::size_t>(machines), 0.0),
        stats_(machines) {
    params_.validate();
  }

  int machines() const override { return n_; }

  void send(Message msg) override {
    check_endpoints(msg, n_);
    std::lock_guard lock(mu_);
    const double t = procs_[idx(msg.src)].clock;
    deliver_locked(std::move(msg), t);
  }

  Message recv(int self, int src, Tag tag, ChannelId channel) override {
    if (src < 0 || src >= n_ || src == self) {
      throw TransportError("invalid receive source " + std::to_string(src));
    }
    std::unique_lock lock(mu_);
    Proc& me = procs_[idx(self)];
    me.state = State::BlockedRecv;
    me.want = {src, tag, channel};
    schedule_locked(lock, self);
    auto& q = me.mail[me.want];
    Message msg = std::move(q.front().msg);
    q.pop_front();
    return msg;
  }

  void serve(int self, Tag request, Tag response, ChannelId channel, Handler handler) override {
    std::lock_guard lock(mu_);
    Proc& me = procs_[idx(self)];
    if (me.services.count({request, channel}) != 0) {
      throw TransportError("handler already registered for this channel");
    }
    me.services[{request, channel}] = Service{response, std::move(handler)};
    std::vector<Pending> early;
    for (auto it = me.mail.begin(); it != me.mail.end();) {
      if (it->first.tag == request && it->first.channel == channel) {
        for (auto& p : it->second) early.push_back(std::move(p));
        it = me.mail.erase(it);
      } else {
        ++it;
      }
    }
    std::stable_sort(early.begin(), early.end(),
                     [](const Pending& a, const Pending& b) { return a.seq < b.seq; });
    for (auto& p : early) {
      push_event_locked(self, std::max(p.arrival, me.clock), std::move(p.msg));
    }
  }

  void unserve(int self, Tag request, ChannelId channel) override {
    std::lock_guard lock(mu_);
    procs_[idx(self)].services.erase({request, channel});
  }

  void barrier(int self) override {
    std::unique_lock lock(mu_);
    procs_[idx(self)].state = State::InBarrier;
    schedule_locked(lock, self);
  }

  void compute(int self, double ops) override {
    const double dt = ops * params_.compute_time_per_op;
    if (!(dt > 0.0)) return;
    std::unique_lock lock(mu_);
    Proc& me = procs_[idx(self)];
    me.clock += dt;
    me.state = State::Runnable;
    schedule_locked(lock, self);
  }

  double now(int self) const override {
    std::lock_guard lock(mu_);
    return procs_[idx(self)].clock;
  }

  void worker_begin(int self) override {
    std::unique_lock lock(mu_);
    procs_[idx(self)].state = State::Runnable;
    if (++started_ < n_) {
      wait_for_baton_locked(lock, self);
      return;
    }
    schedule_locked(lock, self);
  }

  void worker_end(int self) override {
    std::unique_lock lock(mu_);
    Proc& me = procs_[idx(self)];
    me.state = State::Done;
    makespan_ = std::max(makespan_, me.clock);
    schedule_locked(lock, self);
  }

  void worker_fail(int self, std::exception_ptr error) override {
    std::lock_guard lock(mu_);
    fail_locked(self, std::move(error));
    procs_[idx(self)].state = State::Done;
  }

  TrafficStats stats() const override {
    std::lock_guard lock(mu_);
    return stats_;
  }

  double makespan() const override {
    std::lock_guard lock(mu_);
    return makespan_;
  }

  std::optional<std::pair<int, std::exception_ptr>> root_failure() const override {
    std::lock_guard lock(mu_);
    return failure_;
  }

 private:
  enum class State { Idle, Runnable, Running, BlockedRecv, InBarrier, Done };

  struct Pending {
    Message msg;
    double arrival = 0.0;
    std::uint64_t seq = 0;
  };
  struct Service {
    Tag response = Tag::Control;
    Handler fn;
  };
  struct Proc {
    State state = State::Idle;
    double clock = 0.0;
    MailKey want;
    std::map<MailKey, std::deque<Pending>> mail;
    std::map<ServiceKey, Service> services;
  };
  struct Event {
    double time = 0.0;
    std::uint64_t seq = 0;
    int owner = 0;
    Message msg;
  };
  struct EventLater {
    bool operator()(const Event& a, const Event& b) const {
      return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
  };

  static std::size_t idx(int i) { return static_cast<std::size_t>(i); }

  void deliver_locked(Message msg, double send_time) {
    stats_.record(msg.src, msg.dst, msg.tag, msg.payload.bytes(), msg.payload.entries());
    double& link = link_free_[idx(msg.src) * idx(n_) + idx(msg.dst)];
    const double start = std::max(send_time, link);
    const double arrival =
        start + params_.latency + static_cast<double>(msg.payload.bytes()) / params_.bandwidth;
    link = arrival;
    Proc& dst = procs_[idx(msg.dst)];
    if (dst.services.count({msg.tag, msg.channel}) != 0) {
      const int owner = msg.dst;
      push_event_locked(owner, arrival, std::move(msg));
      return;
    }
    MailKey key{msg.src, msg.tag, msg.channel};
    dst.mail[key].push_back(Pending{std::move(msg), arrival, next_seq_++});
  }

  void push_event_locked(int owner, double time, Message msg) {
    events_.push(Event{time, next_seq_++, owner, std::move(msg)});
  }

  void fail_locked(int machine, std::exception_ptr error) {
    if (!failure_) failure_.emplace(machine, std::move(error));
    aborted_ = true;
    cv_.notify_all();
  }

  void wait_for_baton_locked(std::unique_lock<std::mutex>& lock, int self) {
    Proc& me = procs_[idx(self)];
    cv_.wait(lock, [&] { return me.state == State::Running || aborted_; });
    if (aborted_) throw TransportError("run aborted by another worker");
  }

  // Runs handler events and picks the next proc to hold the baton. Returns
  // once `self` holds it again, or immediately if `self` is done.
  void schedule_locked(std::unique_lock<std::mutex>& lock, int self) {
    if (aborted_) {
      if (procs_[idx(self)].state == State::Done) return;
      throw TransportError("run aborted by another worker");
    }
    for (;;) {
      double best = kNever;
      int pick = -1;
      bool all_done = true;
      bool barrier_ready = true;
      double barrier_time = 0.0;
      for (int i = 0; i < n_; ++i) {
        Proc& p = procs_[idx(i)];
        if (p.state != State::Done) all_done = false;
        if (p.state != State::Done && p.state != State::InBarrier) barrier_ready = false;
        if (p.state == State::InBarrier) barrier_time = std::max(barrier_time, p.clock);
        double t = kNever;
        if (p.state == State::Runnable) {
          t = p.clock;
        } else if (p.state == State::BlockedRecv) {
          auto it = p.mail.find(p.want);
          if (it != p.mail.end() && !it->second.empty()) {
            t = std::max(p.clock, it->second.front().arrival);
          }
        }
        if (t < best) {
          best = t;
          pick = i;
        }
      }
      if (all_done) return;
      if (pick < 0 && barrier_ready) {
        if (!events_.empty() && events_.top().time <= barrier_time) {
          run_event_locked();
          continue;
        }
        for (auto& p : procs_) {
          if (p.state == State::InBarrier) {
            p.clock = barrier_time;
            p.state = State::Runnable;
          }
        }
        continue;
      }
      if (!events_.empty() && events_.top().time <= best) {
        run_event_locked();
        if (aborted_) break;
        continue;
      }
      if (pick < 0) {
        report_deadlock_locked();
        break;
      }
      Proc& next = procs_[idx(pick)];
      next.clock = best;
      next.state = State::Running;
      if (pick == self) return;
      cv_.notify_all();
      if (procs_[idx(self)].state == State::Done) return;
      wait_for_baton_locked(lock, self);
      return;
    }
    if (procs_[idx(self)].state == State::Done) return;
    throw TransportError("run aborted");
  }

  void run_event_locked() {
    Event ev = events_.top();
    events_.pop();
    Proc& owner = procs_[idx(ev.owner)];
    auto it = owner.services.find({ev.msg.tag, ev.msg.channel});
    if (it == owner.services.end()) {
      MailKey key{ev.msg.src, ev.msg.tag, ev.msg.channel};
      owner.mail[key].push_back(Pending{std::move(ev.msg), ev.time, next_seq_++});
      return;
    }
    Message resp;
    try {
      resp.payload = it->second.fn(ev.msg);
    } catch (...) {
      fail_locked(ev.owner, std::current_exception());
      return;
    }
    resp.tag = it->second.response;
    resp.src = ev.owner;
    resp.dst = ev.msg.src;
    resp.channel = ev.msg.channel;
    deliver_locked(std::move(resp), ev.time);
  }

  void report_deadlock_locked() {
    for (int i = 0; i < n_; ++i) {
      const Proc& p = procs_[idx(i)];
      if (p.state == State::BlockedRecv) {
        fail_locked(i, std::make_exception_ptr(DeadlockError(
                           "deadlock: machine " + std::to_string(i) +
                           " blocked receiving " + describe(p.want))));
        return;
      }
      if (p.state == State::InBarrier) {
        fail_locked(i, std::make_exception_ptr(DeadlockError(
                           "deadlock: machine " + std::to_string(i) + " blocked in barrier")));
        return;
      }
    }
    fail_locked(0, std::make_exception_ptr(DeadlockError("deadlock: no progress possible")));
  }

  int n_;
  SimParams params_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::vector<Proc> procs_;
  std::vector<double> link_free_;
  std::priority_queue<Event, std::vector<Event>, EventLater> events_;
  std::uint64_t next_seq_ = 0;
  int started_ = 0;
  bool aborted_ = false;
  TrafficStats stats_;
  double makespan_ = 0.0;
  std::optional<std::pair<int, std::exception_ptr>> failure_;
};

}  // namespace

std::unique_ptr<Transport> make_sim_transport(int machines, const SimParams& params) {
  return std::make_unique<SimTransport>(machines, params);
}

}  // namespace allnode::detail
