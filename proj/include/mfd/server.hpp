#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "mfd/session.hpp"

namespace mfd {

// Frames are a 4-byte big-endian payload length followed by UTF-8 JSON.
bool read_frame(int fd, std::string& payload);
bool write_frame(int fd, const std::string& payload);

// Loopback TCP server speaking framed JSON. Each connection gets its own
// thread; requests on one connection are answered in order.
class SessionServer {
 public:
  explicit SessionServer(SessionService& service) : service_(service) {}
  ~SessionServer();
  SessionServer(const SessionServer&) = delete;
  SessionServer& operator=(const SessionServer&) = delete;

  // Port 0 picks a free port. Returns the bound port.
  std::uint16_t start(std::uint16_t port = 0);
  void stop();
  void wait();

 private:
  void accept_loop();
  void serve_connection(int fd);

  SessionService& service_;
  int listen_fd_ = -1;
  std::thread acceptor_;
  std::mutex connections_mutex_;
  std::vector<int> connection_fds_;
  std::vector<std::thread> workers_;
};

// HTTP bridge for browser clients: POST /rpc with a JSON request body.
class HttpBridge {
 public:
  explicit HttpBridge(SessionService& service);
  ~HttpBridge();

  std::uint16_t start(std::uint16_t port = 0);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Blocking client for tests and scripts.
class SessionClient {
 public:
  SessionClient(const std::string& host, std::uint16_t port);
  ~SessionClient();
  SessionClient(const SessionClient&) = delete;
  SessionClient& operator=(const SessionClient&) = delete;

  Json call(const Json& request);

 private:
  int fd_ = -1;
};

}  // namespace mfd
