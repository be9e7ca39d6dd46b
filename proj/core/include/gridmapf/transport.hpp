#pragma once

#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <sys/types.h>

namespace gridmapf {

/// The peer hung up or an I/O error occurred.
class TransportClosed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A bidirectional stream of newline-terminated text messages.
class Transport {
 public:
  using Clock = std::chrono::steady_clock;

  virtual ~Transport() = default;
  /// Writes `line` followed by '\n'. Throws TransportClosed.
  virtual void send(std::string_view line) = 0;
  /// Next line without its terminator, or nullopt if `deadline` passes first.
  /// Throws TransportClosed at end of stream.
  virtual std::optional<std::string> receive(Clock::time_point deadline) = 0;
};

/// Transport over a pair of file descriptors (pipes, sockets, stdio).
class FdTransport : public Transport {
 public:
  /// With `owns_fds` the descriptors are closed on destruction.
  FdTransport(int read_fd, int write_fd, bool owns_fds = false);
  ~FdTransport() override;
  FdTransport(const FdTransport&) = delete;
  FdTransport& operator=(const FdTransport&) = delete;

  void send(std::string_view line) override;
  std::optional<std::string> receive(Clock::time_point deadline) override;

 protected:
  void close_fds();

 private:
  int read_fd_;
  int write_fd_;
  bool owns_;
  std::string buffer_;
};

/// Runs a child process and talks to it over its stdin/stdout. The child's
/// stderr is inherited. SIGPIPE is ignored process-wide once a child has been
/// spawned so a dead child surfaces as TransportClosed.
class ProcessTransport : public FdTransport {
 public:
  /// argv[0] is looked up on PATH. Throws std::runtime_error if the process
  /// cannot be started.
  explicit ProcessTransport(const std::vector<std::string>& argv);
  /// Closes the pipes, then waits up to a second before killing the child.
  ~ProcessTransport() override;

  pid_t pid() const { return pid_; }

 private:
  explicit ProcessTransport(std::pair<std::pair<int, int>, pid_t> spawned);
  pid_t pid_;
};

/// Splits a command line on whitespace, honouring single and double quotes.
std::vector<std::string> split_command(std::string_view command);

}  // namespace gridmapf
