#include "mfd/server.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>

#include <httplib.h>

#include "mfd/error.hpp"

namespace mfd {
namespace {

constexpr std::uint32_t kMaxFrame = 1u << 30;

bool read_exact(int fd, char* buf, std::size_t n) {
  while (n > 0) {
    const ssize_t got = ::recv(fd, buf, n, 0);
    if (got < 0 && errno == EINTR) continue;
    if (got <= 0) return false;
    buf += got;
    n -= static_cast<std::size_t>(got);
  }
  return true;
}

bool write_exact(int fd, const char* buf, std::size_t n) {
  while (n > 0) {
    const ssize_t sent = ::send(fd, buf, n, MSG_NOSIGNAL);
    if (sent < 0 && errno == EINTR) continue;
    if (sent <= 0) return false;
    buf += sent;
    n -= static_cast<std::size_t>(sent);
  }
  return true;
}

Json dispatch_text(SessionService& service, const std::string& text) {
  Json request;
  try {
    request = Json::parse(text);
  } catch (const Json::exception& e) {
    return {{"ok", false}, {"error", "ParseError"}, {"message", e.what()}};
  }
  return service.handle(request);
}

}  // namespace

bool read_frame(int fd, std::string& payload) {
  unsigned char header[4];
  if (!read_exact(fd, reinterpret_cast<char*>(header), 4)) return false;
  const std::uint32_t n = (std::uint32_t{header[0]} << 24) | (std::uint32_t{header[1]} << 16) |
                          (std::uint32_t{header[2]} << 8) | std::uint32_t{header[3]};
  if (n > kMaxFrame) return false;
  payload.resize(n);
  return n == 0 || read_exact(fd, payload.data(), n);
}

bool write_frame(int fd, const std::string& payload) {
  const auto n = static_cast<std::uint32_t>(payload.size());
  const unsigned char header[4] = {static_cast<unsigned char>(n >> 24), static_cast<unsigned char>(n >> 16),
                                   static_cast<unsigned char>(n >> 8), static_cast<unsigned char>(n)};
  return write_exact(fd, reinterpret_cast<const char*>(header), 4) && write_exact(fd, payload.data(), n);
}

SessionServer::~SessionServer() { stop(); }

std::uint16_t SessionServer::start(std::uint16_t port) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw Error(ErrorCode::InvalidArgument, std::string("socket: ") + std::strerror(errno));
  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(listen_fd_, 64) < 0) {
    const std::string why = std::strerror(errno);
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw Error(ErrorCode::InvalidArgument, "cannot listen on port " + std::to_string(port) + ": " + why);
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  acceptor_ = std::thread([this] { accept_loop(); });
  return ntohs(addr.sin_port);
}

void SessionServer::accept_loop() {
  for (;;) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR || errno == ECONNABORTED) continue;
      return;
    }
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    std::lock_guard lock(connections_mutex_);
    connection_fds_.push_back(fd);
    workers_.emplace_back([this, fd] { serve_connection(fd); });
  }
}

void SessionServer::serve_connection(int fd) {
  std::string payload;
  while (read_frame(fd, payload)) {
    if (!write_frame(fd, dispatch_text(service_, payload).dump())) break;
  }
  ::shutdown(fd, SHUT_RDWR);
}

void SessionServer::stop() {
  if (listen_fd_ >= 0) {
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
  if (acceptor_.joinable()) acceptor_.join();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(connections_mutex_);
    for (int fd : connection_fds_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
  }
  for (std::thread& t : workers) t.join();
  std::lock_guard lock(connections_mutex_);
  for (int fd : connection_fds_) ::close(fd);
  connection_fds_.clear();
}

void SessionServer::wait() {
  if (acceptor_.joinable()) acceptor_.join();
}

struct HttpBridge::Impl {
  httplib::Server server;
  std::thread thread;
};

HttpBridge::HttpBridge(SessionService& service) : impl_(std::make_unique<Impl>()) {
  impl_->server.Post("/rpc", [&service](const httplib::Request& req, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_content(dispatch_text(service, req.body).dump(), "application/json");
  });
  impl_->server.Options("/rpc", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.set_header("Access-Control-Allow-Methods", "POST, OPTIONS");
  });
}

HttpBridge::~HttpBridge() { stop(); }

std::uint16_t HttpBridge::start(std::uint16_t port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port("127.0.0.1");
  } else if (!impl_->server.bind_to_port("127.0.0.1", port)) {
    bound = -1;
  }
  if (bound <= 0) throw Error(ErrorCode::InvalidArgument, "cannot listen on HTTP port " + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  return static_cast<std::uint16_t>(bound);
}

void HttpBridge::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

SessionClient::SessionClient(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || !res) {
    throw Error(ErrorCode::InvalidArgument, "cannot resolve " + host);
  }
  fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  const bool ok = fd_ >= 0 && ::connect(fd_, res->ai_addr, res->ai_addrlen) == 0;
  ::freeaddrinfo(res);
  if (!ok) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
    throw Error(ErrorCode::InvalidArgument, "cannot connect to " + host + ":" + std::to_string(port));
  }
  const int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

SessionClient::~SessionClient() {
  if (fd_ >= 0) ::close(fd_);
}

Json SessionClient::call(const Json& request) {
  std::string payload;
  if (!write_frame(fd_, request.dump()) || !read_frame(fd_, payload)) {
    throw Error(ErrorCode::InvalidArgument, "connection closed");
  }
  return Json::parse(payload);
}

}  // namespace mfd
