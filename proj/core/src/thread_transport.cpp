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

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>

#include "transport_impl.hpp"

namespace allnode::detail {

void check_endpoints(const Message& msg, int machines) {
  if (msg.src < 0 || msg.src >= machines || msg.dst < 0 || msg.dst >= machines) {
    throw TransportError("unknown machine in message " + std::to_string(msg.src) + " -> " +
                         std::to_string(msg.dst));
  }
  if (msg.src == msg.dst) {
    throw TransportError("machine " + std::to_string(msg.src) + " sent a message to itself");
  }
}

namespace {

using Clock = std::chrono::steady_clock;
constexpr auto kRecvTimeout = std::chrono::seconds(120);

// Concurrent in-process fabric: one mailbox per machine, delivery on send.
class ThreadTransport final : public Transport {
 public:
  explicit ThreadTransport(int machines)
      : n_(machines), live_(machines), stats_(machines), start_(Clock::now()) {
    for (int i = 0; i < n_; ++i) boxes_.push_back(std::make_unique<Box>());
  }

  int machines() const override { return n_; }

  void send(Message msg) override {
    check_endpoints(msg, n_);
    {
      std::lock_guard lock(stats_mu_);
      stats_.record(msg.src, msg.dst, msg.tag, msg.payload.bytes(), msg.payload.entries());
    }
    const int dst = msg.dst;
    Box& box = *boxes_[static_cast<std::size_t>(dst)];
    std::shared_ptr<Service> run;
    {
      std::lock_guard lock(box.mu);
      auto it = box.services.find({msg.tag, msg.channel});
      if (it != box.services.end()) {
        auto& svc = it->second;
        svc->queue.push_back(std::move(msg));
        if (!svc->busy) {
          svc->busy = true;
          run = svc;
        }
      } else {
        box.mail[{msg.src, msg.tag, msg.channel}].push_back(std::move(msg));
      }
    }
    box.cv.notify_all();
    if (run) drain(dst, box, *run);
  }

  Message recv(int self, int src, Tag tag, ChannelId channel) override {
    if (src < 0 || src >= n_ || src == self) {
      throw TransportError("invalid receive source " + std::to_string(src));
    }
    Box& box = *boxes_[static_cast<std::size_t>(self)];
    std::unique_lock lock(box.mu);
    const MailKey key{src, tag, channel};
    const bool ready = box.cv.wait_for(lock, kRecvTimeout, [&] {
      if (aborted_.load()) return true;
      auto it = box.mail.find(key);
      return it != box.mail.end() && !it->second.empty();
    });
    if (aborted_.load()) throw TransportError("run aborted by another worker");
    if (!ready) throw TransportError("receive timed out waiting for " + describe(key));
    auto it = box.mail.find(key);
    Message msg = std::move(it->second.front());
    it->second.pop_front();
    return msg;
  }

  void serve(int self, Tag request, Tag response, ChannelId channel, Handler handler) override {
    Box& box = *boxes_[static_cast<std::size_t>(self)];
    auto svc = std::make_shared<Service>();
    svc->response = response;
    svc->fn = std::move(handler);
    bool run = false;
    {
      std::lock_guard lock(box.mu);
      if (!box.services.emplace(ServiceKey{request, channel}, svc).second) {
        throw TransportError("handler already registered for this channel");
      }
      for (auto it = box.mail.begin(); it != box.mail.end();) {
        if (it->first.tag == request && it->first.channel == channel) {
          for (auto& m : it->second) svc->queue.push_back(std::move(m));
          it = box.mail.erase(it);
        } else {
          ++it;
        }
      }
      if (!svc->queue.empty()) {
        svc->busy = true;
        run = true;
      }
    }
    if (run) drain(self, box, *svc);
  }

  void unserve(int self, Tag request, ChannelId channel) override {
    Box& box = *boxes_[static_cast<std::size_t>(self)];
    std::shared_ptr<Service> svc;
    {
      std::lock_guard lock(box.mu);
      auto it = box.services.find({request, channel});
      if (it == box.services.end()) return;
      svc = it->second;
      box.services.erase(it);
    }
    // Wait for an in-progress drain so the handler's captures can be released.
    std::unique_lock lock(box.mu);
    box.cv.wait(lock, [&] { return !svc->busy || aborted_.load(); });
  }

  void barrier(int self) override {
    (void)self;
    std::unique_lock lock(barrier_mu_);
    const auto gen = generation_;
    if (++arrived_ >= live_) {
      release_barrier_locked();
      return;
    }
    barrier_cv_.wait(lock, [&] { return generation_ != gen || aborted_.load(); });
    if (generation_ == gen) throw TransportError("run aborted by another worker");
  }

  void compute(int, double) override {}

  double now(int) const override {
    return std::chrono::duration<double>(Clock::now() - start_).count();
  }

  void worker_begin(int) override {}

  void worker_end(int) override {
    {
      std::lock_guard lock(barrier_mu_);
      --live_;
      if (arrived_ > 0 && arrived_ >= live_) release_barrier_locked();
    }
    std::lock_guard lock(stats_mu_);
    makespan_ = std::max(makespan_, now(0));
  }

  void worker_fail(int self, std::exception_ptr error) override {
    {
      std::lock_guard lock(stats_mu_);
      if (!failure_) failure_.emplace(self, std::move(error));
    }
    aborted_.store(true);
    for (auto& box : boxes_) {
      std::lock_guard lock(box->mu);
      box->cv.notify_all();
    }
    std::lock_guard lock(barrier_mu_);
    barrier_cv_.notify_all();
  }

  TrafficStats stats() const override {
    std::lock_guard lock(stats_mu_);
    return stats_;
  }

  double makespan() const override {
    std::lock_guard lock(stats_mu_);
    return makespan_;
  }

  std::optional<std::pair<int, std::exception_ptr>> root_failure() const override {
    std::lock_guard lock(stats_mu_);
    return failure_;
  }

 private:
  struct Service {
    Tag response = Tag::Control;
    Handler fn;
    std::deque<Message> queue;
    bool busy = false;
  };
  struct Box {
    std::mutex mu;
    std::condition_variable cv;
    std::map<MailKey, std::deque<Message>> mail;
    std::map<ServiceKey, std::shared_ptr<Service>> services;
  };

  // Only one thread drains a service at a time, which keeps responses to a
  // requester in request order.
  void drain(int owner, Box& box, Service& svc) {
    for (;;) {
      Message req;
      {
        std::lock_guard lock(box.mu);
        if (svc.queue.empty() || aborted_.load()) {
          svc.busy = false;
          box.cv.notify_all();
          return;
        }
        req = std::move(svc.queue.front());
        svc.queue.pop_front();
      }
      Message resp;
      try {
        resp.payload = svc.fn(req);
      } catch (...) {
        {
          std::lock_guard lock(box.mu);
          svc.busy = false;
        }
        worker_fail(owner, std::current_exception());
        return;
      }
      resp.tag = svc.response;
      resp.src = owner;
      resp.dst = req.src;
      resp.channel = req.channel;
      send(std::move(resp));
    }
  }

  void release_barrier_locked() {
    arrived_ = 0;
    ++generation_;
    barrier_cv_.notify_all();
  }

  int n_;
  std::vector<std::unique_ptr<Box>> boxes_;

  std::mutex barrier_mu_;
  std::condition_variable barrier_cv_;
  int arrived_ = 0;
  int live_;
  std::uint64_t generation_ = 0;

  mutable std::mutex stats_mu_;
  TrafficStats stats_;
  double makespan_ = 0.0;
  std::optional<std::pair<int, std::exception_ptr>> failure_;

  std::atomic<bool> aborted_{false};
  Clock::time_point start_;
};

}  // namespace

std::unique_ptr<Transport> make_thread_transport(int machines) {
  return std::make_unique<ThreadTransport>(machines);
}

}  // namespace allnode::detail
