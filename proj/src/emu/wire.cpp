#include "wellness/emu/wire.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <sstream>

#include <fmt/format.h>

namespace wellness::emu {

namespace {

using Clock = std::chrono::steady_clock;
using std::chrono::milliseconds;

std::int64_t wall_ms() {
  return std::chrono::duration_cast<milliseconds>(std::chrono::system_clock::now().time_since_epoch()).count();
}

sockaddr_in make_address(const std::string& host, int port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  const std::string resolved = host == "localhost" ? "127.0.0.1" : host;
  if (inet_pton(AF_INET, resolved.c_str(), &addr.sin_addr) != 1) throw Error("bad IPv4 address '" + host + "'");
  return addr;
}

}  // namespace

Socket::~Socket() {
  if (fd_ >= 0) ::close(fd_);
}

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = other.release();
  }
  return *this;
}

void Socket::shutdown() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

void LineChannel::write_line(std::string_view line) {
  std::string data(line);
  data += '\n';
  std::size_t sent = 0;
  while (sent < data.size()) {
    const ssize_t n = ::send(socket_.fd(), data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw ConnectionClosed();
    sent += static_cast<std::size_t>(n);
  }
}

bool LineChannel::has_buffered_line() const { return buffer_.find('\n') != std::string::npos; }

std::optional<std::string> LineChannel::read_line(milliseconds timeout) {
  const auto deadline = Clock::now() + timeout;
  while (true) {
    if (const auto newline = buffer_.find('\n'); newline != std::string::npos) {
      std::string line = buffer_.substr(0, newline);
      buffer_.erase(0, newline + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    int wait = -1;
    if (timeout.count() >= 0) {
      wait = static_cast<int>(std::max<std::int64_t>(
          0, std::chrono::duration_cast<milliseconds>(deadline - Clock::now()).count()));
    }
    pollfd pfd{socket_.fd(), POLLIN, 0};
    const int ready = ::poll(&pfd, 1, wait);
    if (ready < 0 && errno == EINTR) continue;
    if (ready < 0) throw ConnectionClosed();
    if (ready == 0) return std::nullopt;

    char chunk[4096];
    const ssize_t n = ::recv(socket_.fd(), chunk, sizeof(chunk), 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw ConnectionClosed();
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

EmulatorServer::EmulatorServer(EmulatorConfig config) : config_(std::move(config)) { config_.profile.validate(); }

EmulatorServer::~EmulatorServer() { stop(); }

int EmulatorServer::listen(const std::string& host, int port) {
  Socket s(::socket(AF_INET, SOCK_STREAM, 0));
  if (!s.valid()) throw Error(std::string("socket: ") + std::strerror(errno));
  const int one = 1;
  ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr = make_address(host, port);
  if (::bind(s.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    throw Error(fmt::format("bind {}:{}: {}", host, port, std::strerror(errno)));
  }
  if (::listen(s.fd(), 64) != 0) throw Error(std::string("listen: ") + std::strerror(errno));
  socklen_t len = sizeof(addr);
  ::getsockname(s.fd(), reinterpret_cast<sockaddr*>(&addr), &len);
  listener_ = std::move(s);
  return ntohs(addr.sin_port);
}

void EmulatorServer::run() {
  while (!stopping_) {
    const int fd = ::accept(listener_.fd(), nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      break;
    }
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    reap_finished();
    std::lock_guard lock(connections_mutex_);
    if (stopping_) {
      ::close(fd);
      break;
    }
    Connection& conn = connections_.emplace_back();
    conn.fd = fd;
    conn.thread = std::thread([this, fd] { serve_connection(Socket(fd)); });
  }
}

void EmulatorServer::start_background() {
  accept_thread_ = std::thread([this] { run(); });
}

void EmulatorServer::stop() {
  if (stopping_.exchange(true)) return;
  listener_.shutdown();
  if (accept_thread_.joinable()) accept_thread_.join();
  std::list<Connection> remaining;
  {
    std::lock_guard lock(connections_mutex_);
    for (auto& c : connections_) {
      if (!c.done) ::shutdown(c.fd, SHUT_RDWR);
    }
    remaining.splice(remaining.end(), connections_);
  }
  for (auto& c : remaining) {
    if (c.thread.joinable()) c.thread.join();
  }
  listener_ = Socket{};
}

void EmulatorServer::reap_finished() {
  std::list<Connection> finished;
  {
    std::lock_guard lock(connections_mutex_);
    for (auto it = connections_.begin(); it != connections_.end();) {
      auto next = std::next(it);
      if (it->done) finished.splice(finished.end(), connections_, it);
      it = next;
    }
  }
  for (auto& c : finished) c.thread.join();
}

void EmulatorServer::serve_connection(Socket socket) {
  const int fd = socket.fd();
  LineChannel channel(std::move(socket));
  EnvironmentProfile profile = config_.profile;
  FaultMode fault = config_.fault;
  std::optional<SampleStream> stream;
  std::uint64_t budget = 0;  // 0: until STOP
  Clock::time_point next_due;
  milliseconds period{0};

  const auto finish_stream = [&] {
    channel.write_line(fmt::format("END {}", stream ? stream->last_seq() : 0));
    stream.reset();
  };

  const auto handle = [&](const std::string& line) {
    std::istringstream in(line);
    std::string command;
    in >> command;
    if (command == "START") {
      double rate = 0.0;
      if (!(in >> rate)) return channel.write_line("ERR START needs a rate");
      std::uint64_t max_samples = 0;
      std::int64_t t0 = wall_ms();
      if (in >> max_samples) in >> t0;
      try {
        stream.emplace(profile, fault, rate, t0);
      } catch (const Error& e) {
        return channel.write_line(std::string("ERR ") + e.what());
      }
      budget = max_samples;
      period = milliseconds(std::llround(1000.0 / rate));
      next_due = Clock::now();
    } else if (command == "STOP") {
      finish_stream();
    } else if (command == "SNAPSHOT") {
      channel.write_line(format_sample_line(emu::snapshot(profile, fault, wall_ms())));
    } else if (command == "SEED") {
      std::uint64_t seed = 0;
      if (!(in >> seed)) return channel.write_line("ERR SEED needs an integer");
      profile.seed = seed;
      channel.write_line("OK");
    } else if (command == "SET") {
      std::string name, shape_name = "normal";
      VariableSpec spec;
      if (!(in >> name >> spec.mean >> spec.stddev)) return channel.write_line("ERR SET <variable> <mean> <stddev>");
      in >> shape_name;
      const auto variable = core::parse_variable(name);
      const auto shape = parse_shape(shape_name);
      if (!variable || !shape) return channel.write_line("ERR unknown variable or shape");
      spec.shape = *shape;
      EnvironmentProfile candidate = profile;
      candidate.spec(*variable) = spec;
      try {
        candidate.validate();
      } catch (const Error& e) {
        return channel.write_line(std::string("ERR ") + e.what());
      }
      profile = std::move(candidate);
      channel.write_line("OK");
    } else if (command == "FAULT") {
      std::string spec;
      in >> spec;
      try {
        fault = FaultMode::parse(spec);
      } catch (const Error& e) {
        return channel.write_line(std::string("ERR ") + e.what());
      }
      channel.write_line("OK");
    } else {
      channel.write_line("ERR unknown command '" + command + "'");
    }
  };

  try {
    channel.write_line(fmt::format("SENSORTAG-EMU v1 {} {}", config_.device_id, profile.name));
    while (!stopping_) {
      milliseconds timeout(-1);
      if (stream) {
        timeout = config_.accelerated
                      ? milliseconds(0)
                      : std::max(milliseconds(0), std::chrono::duration_cast<milliseconds>(next_due - Clock::now()));
      }
      if (auto line = channel.read_line(timeout)) {
        handle(*line);
        continue;
      }
      if (!stream) continue;
      const Emission emission = stream->next();
      if (emission.sample) channel.write_line(format_sample_line(*emission.sample));
      next_due += period;
      if (budget > 0 && emission.seq >= budget) finish_stream();
    }
  } catch (const ConnectionClosed&) {
    // Client hung up or the server is stopping; the stream just ends.
  }

  std::lock_guard lock(connections_mutex_);
  for (auto& c : connections_) {
    if (c.fd == fd && !c.done) {
      c.done = true;
      break;
    }
  }
  channel.socket() = Socket{};
}

EmulatorClient::EmulatorClient(const std::string& host, int port) : channel_(Socket(::socket(AF_INET, SOCK_STREAM, 0))) {
  if (!channel_.socket().valid()) throw Error(std::string("socket: ") + std::strerror(errno));
  sockaddr_in addr = make_address(host, port);
  if (::connect(channel_.socket().fd(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    throw ConnectionClosed();
  }
  const int one = 1;
  ::setsockopt(channel_.socket().fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));

  const auto greeting = channel_.read_line(milliseconds(5000));
  if (!greeting) throw Error("emulator sent no greeting");
  std::istringstream in(*greeting);
  std::string banner, version;
  if (!(in >> banner >> version >> device_id_ >> profile_name_) || banner != "SENSORTAG-EMU" || version != "v1") {
    throw Error("unexpected emulator greeting: " + *greeting);
  }
}

void EmulatorClient::expect_ok() {
  const auto reply = channel_.read_line(milliseconds(5000));
  if (!reply) throw Error("emulator did not answer");
  if (*reply != "OK") throw Error("emulator: " + *reply);
}

core::SensorSample EmulatorClient::snapshot() {
  channel_.write_line("SNAPSHOT");
  const auto reply = channel_.read_line(milliseconds(5000));
  if (!reply) throw Error("emulator did not answer SNAPSHOT");
  auto sample = parse_sample_line(*reply);
  if (!sample) throw Error("emulator: " + *reply);
  return *sample;
}

void EmulatorClient::seed(std::uint64_t seed) {
  channel_.write_line(fmt::format("SEED {}", seed));
  expect_ok();
}

void EmulatorClient::set_variable(core::Variable variable, const VariableSpec& spec) {
  channel_.write_line(
      fmt::format("SET {} {} {} {}", core::to_string(variable), spec.mean, spec.stddev, to_string(spec.shape)));
  expect_ok();
}

void EmulatorClient::set_fault(const FaultMode& fault) {
  channel_.write_line("FAULT " + fault.to_string());
  expect_ok();
}

std::vector<core::SensorSample> EmulatorClient::drain_until_end() {
  std::vector<core::SensorSample> samples;
  while (true) {
    const auto line = channel_.read_line(milliseconds(10000));
    if (!line) throw Error("emulator stream stalled");
    if (line->starts_with("END")) return samples;
    if (line->starts_with("ERR")) throw Error("emulator: " + *line);
    if (auto sample = parse_sample_line(*line)) samples.push_back(*sample);
  }
}

std::vector<core::SensorSample> EmulatorClient::record(double rate_hz, std::uint64_t max_samples,
                                                       std::optional<std::int64_t> t0_ms) {
  if (max_samples == 0) throw Error("record needs a positive sample budget");
  std::string command = fmt::format("START {} {}", rate_hz, max_samples);
  if (t0_ms) command += fmt::format(" {}", *t0_ms);
  channel_.write_line(command);
  return drain_until_end();
}

std::vector<core::SensorSample> EmulatorClient::record_for(double rate_hz, std::chrono::milliseconds duration) {
  channel_.write_line(fmt::format("START {}", rate_hz));
  std::this_thread::sleep_for(duration);
  channel_.write_line("STOP");
  return drain_until_end();
}

}  // namespace wellness::emu
