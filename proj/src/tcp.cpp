#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <set>
#include <thread>

#include "graphfed/error.hpp"
#include "graphfed/transport.hpp"

namespace graphfed {

namespace {

using Clock = std::chrono::steady_clock;

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

class SocketChannel : public Channel {
 public:
  explicit SocketChannel(int fd) : fd_(fd) {
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  }
  ~SocketChannel() override {
    if (fd_ >= 0) ::close(fd_);
  }
  SocketChannel(const SocketChannel&) = delete;
  SocketChannel& operator=(const SocketChannel&) = delete;

  void send(const std::string& bytes) override {
    std::size_t done = 0;
    while (done < bytes.size()) {
      const ssize_t n = ::send(fd_, bytes.data() + done, bytes.size() - done, MSG_NOSIGNAL);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw ProtocolError(errno_text("connection lost while sending"));
      done += static_cast<std::size_t>(n);
    }
  }

  std::string recv() override {
    std::string frame(kFrameHeaderSize, '\0');
    read_exact(frame.data(), kFrameHeaderSize);
    const auto [kind, len] = decode_frame_header(frame);
    frame.resize(kFrameHeaderSize + len);
    read_exact(frame.data() + kFrameHeaderSize, len);
    return frame;
  }

  void set_recv_timeout(std::chrono::milliseconds t) {
    timeval tv{};
    tv.tv_sec = static_cast<time_t>(t.count() / 1000);
    tv.tv_usec = static_cast<suseconds_t>((t.count() % 1000) * 1000);
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
  }

 private:
  void read_exact(char* dst, std::size_t len) {
    std::size_t done = 0;
    while (done < len) {
      const ssize_t n = ::recv(fd_, dst + done, len - done, 0);
      if (n < 0 && errno == EINTR) continue;
      if (n == 0) throw ProtocolError("connection closed by peer");
      if (n < 0) throw ProtocolError(errno_text("connection lost while receiving"));
      done += static_cast<std::size_t>(n);
    }
  }
  int fd_;
};

addrinfo* resolve(const Endpoint& ep, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(ep.port);
  const int rc = ::getaddrinfo(ep.host.empty() ? nullptr : ep.host.c_str(), port.c_str(), &hints, &res);
  if (rc != 0) throw ConfigError("cannot resolve " + ep.host + ": " + ::gai_strerror(rc));
  return res;
}

}  // namespace

Endpoint parse_endpoint(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos) throw ConfigError("address must look like host:port");
  Endpoint ep;
  if (colon > 0) ep.host = std::string(text.substr(0, colon));
  const std::string port(text.substr(colon + 1));
  std::size_t used = 0;
  unsigned long value = 0;
  try {
    value = std::stoul(port, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != port.size() || value > 65535) throw ConfigError("bad port in address '" + std::string(text) + "'");
  ep.port = static_cast<std::uint16_t>(value);
  return ep;
}

TcpMaster::TcpMaster(const Endpoint& bind) {
  addrinfo* res = resolve(bind, true);
  fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (fd_ < 0) {
    ::freeaddrinfo(res);
    throw ProtocolError(errno_text("socket"));
  }
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  const int rc = ::bind(fd_, res->ai_addr, res->ai_addrlen);
  ::freeaddrinfo(res);
  if (rc != 0 || ::listen(fd_, 64) != 0) {
    const std::string msg = errno_text("bind/listen");
    ::close(fd_);
    throw ProtocolError(msg);
  }
  sockaddr_in addr{};
  socklen_t len = sizeof(addr);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpMaster::~TcpMaster() {
  if (fd_ >= 0) ::close(fd_);
}

std::vector<std::unique_ptr<Channel>> TcpMaster::accept_workers(std::size_t m, std::chrono::milliseconds timeout,
                                                                std::vector<std::uint32_t>& worker_ids) {
  const auto deadline = Clock::now() + timeout;
  std::vector<std::unique_ptr<Channel>> out;
  std::set<std::uint32_t> seen;
  worker_ids.clear();
  while (out.size() < m) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    if (left.count() <= 0)
      throw ProtocolError("timed out waiting for workers: " + std::to_string(out.size()) + " of " +
                          std::to_string(m) + " said Hello");
    pollfd pfd{fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (ready < 0 && errno == EINTR) continue;
    if (ready <= 0) continue;
    const int client = ::accept(fd_, nullptr, nullptr);
    if (client < 0) continue;
    auto channel = std::make_unique<SocketChannel>(client);
    channel->set_recv_timeout(std::max(left, std::chrono::milliseconds(1)));
    std::uint32_t id = 0;
    try {
      const Frame hello = decode_frame(channel->recv());
      if (hello.kind != MessageKind::kHello) throw ProtocolError("expected Hello");
      id = decode_hello(hello.payload);
    } catch (const ProtocolError&) {
      continue;  // drop the connection
    }
    if (id >= m || !seen.insert(id).second) {
      try {
        channel->send(encode_frame(MessageKind::kShutdown, {}));
      } catch (const ProtocolError&) {
      }
      continue;
    }
    channel->set_recv_timeout(std::chrono::milliseconds(0));
    worker_ids.push_back(id);
    out.push_back(std::move(channel));
  }
  return out;
}

DistributedResult TcpMaster::run(const Dataset& d, const TrainConfig& cfg, DistributedPlan plan,
                                 std::chrono::milliseconds hello_timeout, const ParamsObserver& observer) {
  std::vector<std::uint32_t> ids;
  auto channels = accept_workers(plan.workers.size(), hello_timeout, ids);
  return run_master_protocol(std::move(channels), d, cfg, std::move(plan), observer, std::move(ids));
}

bool run_worker(const Endpoint& master, std::uint32_t worker_id, std::chrono::milliseconds connect_timeout) {
  const auto deadline = Clock::now() + connect_timeout;
  int fd = -1;
  while (true) {
    addrinfo* res = resolve(master, false);
    fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    const int rc = fd < 0 ? -1 : ::connect(fd, res->ai_addr, res->ai_addrlen);
    ::freeaddrinfo(res);
    if (rc == 0) break;
    if (fd >= 0) ::close(fd);
    if (Clock::now() >= deadline)
      throw ProtocolError("cannot connect to master " + master.host + ":" + std::to_string(master.port));
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  SocketChannel channel(fd);
  return serve_worker(channel, worker_id);
}

}  // namespace graphfed
