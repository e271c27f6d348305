#pragma once

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <condition_variable>
#include <cstring>
#include <memory>
#include <mutex>
#include <queue>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "vmpc/common.hpp"
#include "vmpc/ring.hpp"
#include "vmpc/sharing.hpp"

namespace vmpc {

enum class FrameKind : u8 { open = 1, sync = 2, result = 3, control = 4 };

/// Communication cost counters; monotone within a session. A round is one
/// matched exchange (or one one-way release step, counted on both sides).
struct ChannelStats {
  u64 rounds = 0;
  u64 bytes_sent = 0;
  u64 bytes_received = 0;
  u64 opens = 0;
};

/// Frame wire format: 4-byte LE payload length (in bytes), 1-byte kind,
/// then the payload as packed 64-bit LE ring elements.
class Channel {
 public:
  virtual ~Channel() = default;

  /// Symmetric step: send our vector, receive the peer's. Both sides must
  /// pass equal-length vectors; a length or kind mismatch is a protocol
  /// error. Costs exactly one round regardless of the vector length.
  std::vector<RingElement> exchange(std::span<const RingElement> v,
                                    FrameKind kind = FrameKind::sync) {
    send_values(kind, v, /*count_round=*/false);
    std::vector<RingElement> peer = recv_values(kind, /*count_round=*/false);
    if (peer.size() != v.size())
      throw protocol_error("exchange: peer sent " + std::to_string(peer.size()) +
                           " elements, expected " + std::to_string(v.size()));
    stats_.rounds++;
    if (kind == FrameKind::open) stats_.opens++;
    return peer;
  }

  /// One-way frame (used by the release step). Counted as a round on the
  /// sending side; the matching recv_values counts it on the receiver.
  void send_values(FrameKind kind, std::span<const RingElement> v,
                   bool count_round = true) {
    const u32 payload = static_cast<u32>(v.size() * 8);
    std::vector<u8> buf(5 + payload);
    buf[0] = static_cast<u8>(payload);
    buf[1] = static_cast<u8>(payload >> 8);
    buf[2] = static_cast<u8>(payload >> 16);
    buf[3] = static_cast<u8>(payload >> 24);
    buf[4] = static_cast<u8>(kind);
    for (size_t i = 0; i < v.size(); i++)
      for (int j = 0; j < 8; j++) buf[5 + 8 * i + j] = static_cast<u8>(v[i].v >> (8 * j));
    send_bytes(buf.data(), buf.size());
    stats_.bytes_sent += buf.size();
    if (count_round) stats_.rounds++;
  }

  std::vector<RingElement> recv_values(FrameKind want, bool count_round = true) {
    u8 hdr[5];
    recv_bytes(hdr, 5);
    const u32 payload = static_cast<u32>(hdr[0]) | (static_cast<u32>(hdr[1]) << 8) |
                        (static_cast<u32>(hdr[2]) << 16) | (static_cast<u32>(hdr[3]) << 24);
    if (hdr[4] != static_cast<u8>(want))
      throw protocol_error("unexpected frame kind " + std::to_string(hdr[4]));
    if (payload % 8 != 0) throw protocol_error("frame payload not word-aligned");
    std::vector<u8> buf(payload);
    if (payload) recv_bytes(buf.data(), payload);
    stats_.bytes_received += 5 + payload;
    if (count_round) stats_.rounds++;
    std::vector<RingElement> out(payload / 8);
    for (size_t i = 0; i < out.size(); i++) {
      u64 x = 0;
      for (int j = 0; j < 8; j++) x |= static_cast<u64>(buf[8 * i + j]) << (8 * j);
      out[i].v = x;
    }
    return out;
  }

  const ChannelStats& stats() const { return stats_; }

 protected:
  virtual void send_bytes(const void* data, size_t n) = 0;
  virtual void recv_bytes(void* data, size_t n) = 0;

 private:
  ChannelStats stats_;
};

// ---------------------------------------------------------------------------
// In-process loopback: two endpoints over a shared queue pair. Used for
// deterministic single-process sessions and tests.
// ---------------------------------------------------------------------------

class LoopbackChannel final : public Channel {
 public:
  struct State {
    std::mutex m;
    std::condition_variable cv;
    std::queue<std::vector<u8>> to_p1, to_p2;
  };

  LoopbackChannel(std::shared_ptr<State> state, PartyId me)
      : state_(std::move(state)), me_(me) {}

  static std::pair<std::unique_ptr<LoopbackChannel>, std::unique_ptr<LoopbackChannel>>
  make_pair() {
    auto st = std::make_shared<State>();
    return {std::make_unique<LoopbackChannel>(st, PartyId::p1),
            std::make_unique<LoopbackChannel>(st, PartyId::p2)};
  }

  /// When set, every sent payload word is appended here (test hook).
  std::vector<u64>* sent_log = nullptr;

 protected:
  void send_bytes(const void* data, size_t n) override {
    std::vector<u8> buf(n);
    std::memcpy(buf.data(), data, n);
    if (sent_log && n > 5) {
      for (size_t off = 5; off + 8 <= n; off += 8) {
        u64 x = 0;
        for (int j = 0; j < 8; j++) x |= static_cast<u64>(buf[off + j]) << (8 * j);
        sent_log->push_back(x);
      }
    }
    {
      std::lock_guard<std::mutex> lk(state_->m);
      inbox_of(other(me_)).push(std::move(buf));
    }
    state_->cv.notify_all();
  }

  void recv_bytes(void* data, size_t n) override {
    size_t got = 0;
    while (got < n) {
      std::unique_lock<std::mutex> lk(state_->m);
      auto& q = inbox_of(me_);
      state_->cv.wait(lk, [&] { return !q.empty(); });
      std::vector<u8>& front = q.front();
      size_t take = std::min(n - got, front.size() - cursor_);
      std::memcpy(static_cast<u8*>(data) + got, front.data() + cursor_, take);
      got += take;
      cursor_ += take;
      if (cursor_ == front.size()) {
        q.pop();
        cursor_ = 0;
      }
    }
  }

 private:
  std::queue<std::vector<u8>>& inbox_of(PartyId p) {
    return p == PartyId::p1 ? state_->to_p1 : state_->to_p2;
  }

  std::shared_ptr<State> state_;
  PartyId me_;
  size_t cursor_ = 0;
};

// ---------------------------------------------------------------------------
// Plaintext TCP between the two servers. Party 1 listens, party 2 connects.
// Deliberately unencrypted and unauthenticated; a TLS wrapper would slot in
// at the send_bytes/recv_bytes seam.
// ---------------------------------------------------------------------------

class TcpChannel final : public Channel {
 public:
  TcpChannel(TcpChannel&& o) noexcept : fd_(o.fd_) { o.fd_ = -1; }
  TcpChannel& operator=(TcpChannel&&) = delete;
  TcpChannel(const TcpChannel&) = delete;

  ~TcpChannel() override {
    if (fd_ >= 0) ::close(fd_);
  }

  static std::unique_ptr<TcpChannel> listen_and_accept(const std::string& host, int port) {
    int lfd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (lfd < 0) throw transport_error("socket() failed");
    int yes = 1;
    ::setsockopt(lfd, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    sockaddr_in addr = make_addr(host, port);
    if (::bind(lfd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
      ::close(lfd);
      throw transport_error("bind failed on port " + std::to_string(port));
    }
    if (::listen(lfd, 1) != 0) {
      ::close(lfd);
      throw transport_error("listen failed");
    }
    int fd = ::accept(lfd, nullptr, nullptr);
    ::close(lfd);
    if (fd < 0) throw transport_error("accept failed");
    return std::unique_ptr<TcpChannel>(new TcpChannel(fd));
  }

  static std::unique_ptr<TcpChannel> connect(const std::string& host, int port,
                                             int retries = 100) {
    for (int attempt = 0;; attempt++) {
      int fd = ::socket(AF_INET, SOCK_STREAM, 0);
      if (fd < 0) throw transport_error("socket() failed");
      sockaddr_in addr = make_addr(host, port);
      if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0)
        return std::unique_ptr<TcpChannel>(new TcpChannel(fd));
      ::close(fd);
      if (attempt >= retries)
        throw transport_error("connect to " + host + ":" + std::to_string(port) + " failed");
      std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
  }

 protected:
  void send_bytes(const void* data, size_t n) override {
    const u8* p = static_cast<const u8*>(data);
    while (n > 0) {
      ssize_t w = ::send(fd_, p, n, MSG_NOSIGNAL);
      if (w <= 0) throw transport_error("connection lost while sending");
      p += w;
      n -= static_cast<size_t>(w);
    }
  }

  void recv_bytes(void* data, size_t n) override {
    u8* p = static_cast<u8*>(data);
    while (n > 0) {
      ssize_t r = ::recv(fd_, p, n, 0);
      if (r <= 0) throw transport_error("connection lost while receiving");
      p += r;
      n -= static_cast<size_t>(r);
    }
  }

 private:
  explicit TcpChannel(int fd) : fd_(fd) {
    int yes = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &yes, sizeof(yes));
  }

  static sockaddr_in make_addr(const std::string& host, int port) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<uint16_t>(port));
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
      throw transport_error("bad host address: " + host);
    return addr;
  }

  int fd_;
};

// ---------------------------------------------------------------------------
// Session handshake: both sides exchange (magic, version, q, f, session id)
// in a control frame and abort on any mismatch.
// ---------------------------------------------------------------------------

constexpr u64 kHandshakeMagic = 0x43504d56;  // "VMPC" LE
constexpr u64 kWireVersion = 1;

inline void handshake(Channel& chan, const Ring& ring, u64 session_id) {
  const RingElement mine[5] = {{kHandshakeMagic},
                               {kWireVersion},
                               {static_cast<u64>(ring.q())},
                               {static_cast<u64>(ring.f())},
                               {session_id}};
  std::vector<RingElement> peer = chan.exchange(mine, FrameKind::control);
  if (peer.size() != 5 || peer[0].v != kHandshakeMagic)
    throw handshake_error("handshake: bad magic");
  if (peer[1].v != kWireVersion) throw handshake_error("handshake: version mismatch");
  if (peer[2].v != static_cast<u64>(ring.q()) || peer[3].v != static_cast<u64>(ring.f()))
    throw handshake_error("handshake: ring parameter mismatch");
  if (peer[4].v != session_id) throw handshake_error("handshake: session id mismatch");
}

}  // namespace vmpc
