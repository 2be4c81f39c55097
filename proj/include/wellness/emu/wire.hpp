#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <list>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "wellness/emu/stream.hpp"

namespace wellness::emu {

/// Owning file descriptor.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket();
  Socket(Socket&& other) noexcept : fd_(other.release()) {}
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  int release() { return std::exchange(fd_, -1); }
  void shutdown();

 private:
  int fd_ = -1;
};

class ConnectionClosed : public Error {
 public:
  ConnectionClosed() : Error("sensor connection closed") {}
};

/// Buffered newline-delimited reader/writer over a connected socket.
class LineChannel {
 public:
  explicit LineChannel(Socket socket) : socket_(std::move(socket)) {}

  /// Throws ConnectionClosed if the peer went away.
  void write_line(std::string_view line);
  /// Waits up to `timeout` (forever when negative). nullopt on timeout;
  /// throws ConnectionClosed on EOF.
  std::optional<std::string> read_line(std::chrono::milliseconds timeout = std::chrono::milliseconds(-1));
  /// A complete line is already buffered.
  bool has_buffered_line() const;
  Socket& socket() { return socket_; }

 private:
  Socket socket_;
  std::string buffer_;
};

struct EmulatorConfig {
  EnvironmentProfile profile;
  FaultMode fault;
  std::string device_id = "sensortag-emu-0";
  /// Emit samples back to back with virtual timestamps instead of pacing
  /// them at the requested rate.
  bool accelerated = false;
};

/// Serves the emulator wire protocol, one thread per connection:
///   greeting   SENSORTAG-EMU v1 <device_id> <profile_name>
///   samples    S <seq> <timestamp_ms> <temp_c> <rh_pct> <hpa> <lux> <db>
///   control    START <rate_hz> [<max_samples> [<t0_ms>]] | STOP | SNAPSHOT
///              SEED <u64> | SET <variable> <mean> <stddev> [<shape>] | FAULT <spec>
/// A stream ends with `END <last_seq>` after STOP or once max_samples seqs
/// are consumed. SEED/SET/FAULT answer `OK`, bad commands `ERR <reason>`.
/// Every connection starts from the configured profile and fault.
class EmulatorServer {
 public:
  explicit EmulatorServer(EmulatorConfig config);
  ~EmulatorServer();

  EmulatorServer(const EmulatorServer&) = delete;
  EmulatorServer& operator=(const EmulatorServer&) = delete;

  /// Binds and listens; port 0 picks a free port. Returns the bound port.
  int listen(const std::string& host, int port);
  /// Accept loop; blocks until stop().
  void run();
  void start_background();
  void stop();

 private:
  struct Connection {
    std::thread thread;
    int fd = -1;
    std::atomic<bool> done{false};
  };

  void serve_connection(Socket socket);
  void reap_finished();

  EmulatorConfig config_;
  Socket listener_;
  std::atomic<bool> stopping_{false};
  std::thread accept_thread_;
  std::mutex connections_mutex_;
  std::list<Connection> connections_;
};

/// Client side of the wire protocol.
class EmulatorClient {
 public:
  EmulatorClient(const std::string& host, int port);

  const std::string& device_id() const { return device_id_; }
  const std::string& profile_name() const { return profile_name_; }

  core::SensorSample snapshot();
  void seed(std::uint64_t seed);
  void set_variable(core::Variable variable, const VariableSpec& spec);
  void set_fault(const FaultMode& fault);

  /// START with a sample budget; collects every sample until END.
  std::vector<core::SensorSample> record(double rate_hz, std::uint64_t max_samples,
                                         std::optional<std::int64_t> t0_ms = std::nullopt);
  /// Real-time capture: START, wait `duration`, STOP, drain until END.
  std::vector<core::SensorSample> record_for(double rate_hz, std::chrono::milliseconds duration);

  /// Raw access for transcript tests.
  void send(std::string_view line) { channel_.write_line(line); }
  std::optional<std::string> receive(std::chrono::milliseconds timeout = std::chrono::milliseconds(5000)) {
    return channel_.read_line(timeout);
  }

 private:
  void expect_ok();
  std::vector<core::SensorSample> drain_until_end();

  LineChannel channel_;
  std::string device_id_;
  std::string profile_name_;
};

}  // namespace wellness::emu
