// Copyright 2026 the qddkit authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qdd/bus.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>

namespace qdd {

std::unique_ptr<CanBus> open_socketcan(const BusConfig& config,
                                       std::shared_ptr<TimeSource> ts);

CanFrame make_frame(uint32_t arbitration_id, std::span<const uint8_t> payload,
                    bool is_extended) {
  if (payload.size() > 8) throw ValidationError("CAN payload exceeds 8 bytes");
  const uint32_t mask = is_extended ? kExtendedIdMask : kStandardIdMask;
  if (arbitration_id > mask)
    throw ValidationError("arbitration id 0x" + std::to_string(arbitration_id) +
                          " does not fit the frame format");
  CanFrame f;
  f.arbitration_id = arbitration_id;
  f.is_extended = is_extended;
  f.dlc = static_cast<uint8_t>(payload.size());
  std::copy(payload.begin(), payload.end(), f.data.begin());
  return f;
}

namespace {

class VirtualDomainImpl;

// Per-handle endpoint state. Queue-mode endpoints buffer frames for recv();
// responder-mode endpoints hand frames to a callback instead.
struct Peer {
  std::deque<CanFrame> queue;
  std::condition_variable cv;
  std::function<void(const CanFrame&)> responder;
  bool open = true;
};

class VirtualDomainImpl final : public VirtualDomain,
                                public std::enable_shared_from_this<VirtualDomainImpl> {
 public:
  VirtualDomainImpl(std::string name, VirtualBusOptions opts,
                    std::shared_ptr<TimeSource> ts)
      : name_(std::move(name)),
        opts_(opts),
        ts_(std::move(ts)),
        tokens_(opts.burst_frames),
        last_refill_(ts_->now()) {}

  std::shared_ptr<Peer> attach(bool exclusive_request) {
    std::lock_guard lock(m_);
    if ((opts_.exclusive || exclusive_request) && !peers_.empty())
      throw BusError("virtual channel '" + name_ + "' is exclusively held");
    if (exclusive_request) opts_.exclusive = true;
    auto peer = std::make_shared<Peer>();
    peers_.push_back(peer);
    return peer;
  }

  void detach(const std::shared_ptr<Peer>& peer) {
    std::lock_guard lock(m_);
    peer->open = false;
    peer->cv.notify_all();
    peers_.erase(std::remove(peers_.begin(), peers_.end(), peer), peers_.end());
  }

  SendResult send_from(const Peer* sender, CanFrame frame) {
    std::vector<std::function<void(const CanFrame&)>> responders;
    {
      std::lock_guard lock(m_);
      frame.timestamp = ts_->now();
      if (opts_.capacity_fps > 0) {
        refill_locked(frame.timestamp);
        if (tokens_ < 1.0) {
          ++backpressure_;
          return SendResult::Backpressure;
        }
      }
      for (const auto& p : peers_) {
        if (p.get() == sender || p->responder || !p->open) continue;
        if (p->queue.size() >= opts_.queue_depth) {
          ++backpressure_;
          return SendResult::Backpressure;
        }
      }
      if (opts_.capacity_fps > 0) tokens_ -= 1.0;
      ++frames_sent_;
      if (opts_.record_traffic) log_.push_back(frame);
      for (const auto& p : peers_) {
        if (p.get() == sender || !p->open) continue;
        if (p->responder) {
          responders.push_back(p->responder);
        } else {
          p->queue.push_back(frame);
          p->cv.notify_one();
        }
      }
    }
    // Responders run outside the domain lock so they can send replies.
    for (const auto& fn : responders) fn(frame);
    return SendResult::Ok;
  }

  std::optional<CanFrame> recv_on(const std::shared_ptr<Peer>& peer, double timeout_s) {
    std::unique_lock lock(m_);
    if (!peer->queue.empty()) {
      CanFrame f = peer->queue.front();
      peer->queue.pop_front();
      return f;
    }
    if (timeout_s <= 0) return std::nullopt;
    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::duration_cast<std::chrono::nanoseconds>(
                              std::chrono::duration<double>(timeout_s));
    peer->cv.wait_until(lock, deadline,
                        [&] { return !peer->queue.empty() || !peer->open; });
    if (peer->queue.empty()) return std::nullopt;
    CanFrame f = peer->queue.front();
    peer->queue.pop_front();
    return f;
  }

  void set_responder_on(const std::shared_ptr<Peer>& peer,
                        std::function<void(const CanFrame&)> fn) {
    std::lock_guard lock(m_);
    peer->responder = std::move(fn);
    peer->queue.clear();
  }

  std::vector<CanFrame> traffic_log() const override {
    std::lock_guard lock(m_);
    return log_;
  }
  void clear_traffic_log() override {
    std::lock_guard lock(m_);
    log_.clear();
  }
  size_t handle_count() const override {
    std::lock_guard lock(m_);
    return peers_.size();
  }
  uint64_t frames_sent() const override {
    std::lock_guard lock(m_);
    return frames_sent_;
  }
  uint64_t backpressure_count() const override {
    std::lock_guard lock(m_);
    return backpressure_;
  }

  bool claim(uint64_t key) override {
    std::lock_guard lock(m_);
    for (uint64_t k : claims_)
      if (k == key) return false;
    claims_.push_back(key);
    return true;
  }

  void release(uint64_t key) override {
    std::lock_guard lock(m_);
    claims_.erase(std::remove(claims_.begin(), claims_.end(), key), claims_.end());
  }

  const std::string& name() const { return name_; }

 private:
  void refill_locked(double now) {
    const double dt = now - last_refill_;
    if (dt > 0) {
      tokens_ = std::min(opts_.burst_frames, tokens_ + dt * opts_.capacity_fps);
      last_refill_ = now;
    }
  }

  std::string name_;
  VirtualBusOptions opts_;
  std::shared_ptr<TimeSource> ts_;
  mutable std::mutex m_;
  std::vector<std::shared_ptr<Peer>> peers_;
  double tokens_;
  double last_refill_;
  std::vector<CanFrame> log_;
  std::vector<uint64_t> claims_;
  uint64_t frames_sent_ = 0;
  uint64_t backpressure_ = 0;
};

std::mutex g_registry_mutex;
std::map<std::string, std::shared_ptr<VirtualDomainImpl>>& registry() {
  static std::map<std::string, std::shared_ptr<VirtualDomainImpl>> r;
  return r;
}

std::shared_ptr<VirtualDomainImpl> domain_for(const std::string& name,
                                              const VirtualBusOptions& opts,
                                              const std::shared_ptr<TimeSource>& ts) {
  std::lock_guard lock(g_registry_mutex);
  auto& reg = registry();
  auto it = reg.find(name);
  if (it != reg.end()) return it->second;
  auto domain = std::make_shared<VirtualDomainImpl>(name, opts, ts);
  reg.emplace(name, domain);
  return domain;
}

class VirtualCanBus final : public CanBus {
 public:
  VirtualCanBus(std::shared_ptr<VirtualDomainImpl> domain, bool exclusive)
      : domain_(std::move(domain)), peer_(domain_->attach(exclusive)) {}

  ~VirtualCanBus() override { close(); }

  SendResult send(const CanFrame& frame) override {
    ensure_open();
    if (frame.dlc > 8) throw ValidationError("CAN payload exceeds 8 bytes");
    return domain_->send_from(peer_.get(), frame);
  }

  std::optional<CanFrame> recv(double timeout_s) override {
    ensure_open();
    if (peer_->responder)
      throw UsageError("recv on a responder-mode bus handle");
    return domain_->recv_on(peer_, timeout_s);
  }

  bool set_responder(std::function<void(const CanFrame&)> fn) override {
    ensure_open();
    domain_->set_responder_on(peer_, std::move(fn));
    return true;
  }

  void close() override {
    if (peer_) {
      domain_->detach(peer_);
      peer_.reset();
    }
  }

  bool is_open() const override { return peer_ != nullptr; }

 private:
  void ensure_open() const {
    if (!peer_)
      throw UsageError("bus handle on '" + domain_->name() + "' is closed");
  }

  std::shared_ptr<VirtualDomainImpl> domain_;
  std::shared_ptr<Peer> peer_;
};

}  // namespace

std::unique_ptr<CanBus> open_bus(const BusConfig& config,
                                 std::shared_ptr<TimeSource> ts) {
  if (!ts) ts = default_time_source();
  if (config.receive_timeout_s <= 0)
    throw ConfigError("receive_timeout must be positive");
  switch (config.backend) {
    case BusBackend::Virtual: {
      if (config.interface_name.empty())
        throw ConfigError("virtual channel name must not be empty");
      auto domain = domain_for(config.interface_name, config.virtual_opts, ts);
      return std::make_unique<VirtualCanBus>(std::move(domain),
                                             config.virtual_opts.exclusive);
    }
    case BusBackend::SocketCan:
      return open_socketcan(config, std::move(ts));
  }
  throw ConfigError("unknown bus backend");
}

std::shared_ptr<VirtualDomain> find_virtual_domain(const std::string& name) {
  std::lock_guard lock(g_registry_mutex);
  auto& reg = registry();
  auto it = reg.find(name);
  return it == reg.end() ? nullptr : it->second;
}

}  // namespace qdd
