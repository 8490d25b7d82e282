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

// Raw CAN socket backend. Excluded from default test runs: CI machines have
// no CAN interfaces, so only the open-failure path is exercised there.

#include "qdd/bus.hpp"

#ifdef QDDKIT_HAVE_SOCKETCAN

#include <cerrno>
#include <cstring>

#include <linux/can.h>
#include <linux/can/raw.h>
#include <net/if.h>
#include <poll.h>
#include <sys/ioctl.h>
#include <sys/socket.h>
#include <unistd.h>

namespace qdd {

namespace {

class SocketCanBus final : public CanBus {
 public:
  SocketCanBus(const BusConfig& config, std::shared_ptr<TimeSource> ts)
      : ts_(std::move(ts)) {
    fd_ = ::socket(PF_CAN, SOCK_RAW, CAN_RAW);
    if (fd_ < 0)
      throw BusError(std::string("cannot create CAN socket: ") + std::strerror(errno));
    ifreq ifr{};
    std::strncpy(ifr.ifr_name, config.interface_name.c_str(), IFNAMSIZ - 1);
    if (::ioctl(fd_, SIOCGIFINDEX, &ifr) < 0) {
      ::close(fd_);
      fd_ = -1;
      throw BusError("CAN interface '" + config.interface_name +
                     "' not found; create a test interface with: "
                     "sudo ip link add dev " + config.interface_name +
                     " type vcan && sudo ip link set up " + config.interface_name);
    }
    sockaddr_can addr{};
    addr.can_family = AF_CAN;
    addr.can_ifindex = ifr.ifr_ifindex;
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
      ::close(fd_);
      fd_ = -1;
      throw BusError("cannot bind to '" + config.interface_name + "': " +
                     std::strerror(errno));
    }
  }

  ~SocketCanBus() override { close(); }

  SendResult send(const CanFrame& frame) override {
    ensure_open();
    can_frame raw{};
    raw.can_id = frame.arbitration_id;
    if (frame.is_extended) raw.can_id |= CAN_EFF_FLAG;
    raw.can_dlc = frame.dlc;
    std::memcpy(raw.data, frame.data.data(), frame.dlc);
    const ssize_t n = ::write(fd_, &raw, sizeof(raw));
    if (n == sizeof(raw)) return SendResult::Ok;
    if (errno == ENOBUFS || errno == EAGAIN || errno == EWOULDBLOCK)
      return SendResult::Backpressure;
    throw BusError(std::string("CAN send failed: ") + std::strerror(errno));
  }

  std::optional<CanFrame> recv(double timeout_s) override {
    ensure_open();
    pollfd pfd{fd_, POLLIN, 0};
    const int ms = timeout_s <= 0 ? 0 : static_cast<int>(timeout_s * 1000.0 + 0.5);
    const int rc = ::poll(&pfd, 1, ms);
    if (rc < 0) throw BusError(std::string("CAN poll failed: ") + std::strerror(errno));
    if (rc == 0) return std::nullopt;
    can_frame raw{};
    const ssize_t n = ::read(fd_, &raw, sizeof(raw));
    if (n < static_cast<ssize_t>(sizeof(raw)))
      throw BusError("truncated CAN read");
    CanFrame f;
    f.is_extended = (raw.can_id & CAN_EFF_FLAG) != 0;
    f.arbitration_id = raw.can_id & (f.is_extended ? CAN_EFF_MASK : CAN_SFF_MASK);
    f.dlc = raw.can_dlc > 8 ? 8 : raw.can_dlc;
    std::memcpy(f.data.data(), raw.data, f.dlc);
    f.timestamp = ts_->now();
    return f;
  }

  void close() override {
    if (fd_ >= 0) {
      ::close(fd_);
      fd_ = -1;
    }
  }

  bool is_open() const override { return fd_ >= 0; }

 private:
  void ensure_open() const {
    if (fd_ < 0) throw UsageError("CAN socket is closed");
  }

  std::shared_ptr<TimeSource> ts_;
  int fd_ = -1;
};

}  // namespace

std::unique_ptr<CanBus> open_socketcan(const BusConfig& config,
                                       std::shared_ptr<TimeSource> ts) {
  return std::make_unique<SocketCanBus>(config, std::move(ts));
}

}  // namespace qdd

#else  // !QDDKIT_HAVE_SOCKETCAN

namespace qdd {

std::unique_ptr<CanBus> open_socketcan(const BusConfig&, std::shared_ptr<TimeSource>) {
  throw BusError("this build has no SocketCAN support");
}

}  // namespace qdd

#endif
