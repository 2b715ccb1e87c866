#pragma once

#include <cstdint>
#include <memory>

#include "flexinst/config.hpp"
#include "flexinst/telemetry.hpp"
#include "flexinst/teleop_loop.hpp"

namespace flexinst {

/// WebSocket endpoint for the operator console. One session at a time;
/// later connections get a `busy` message and are closed. Session I/O runs
/// on a private thread and only touches the loop through `input`.
class ConsoleBridge {
 public:
  /// Binds immediately; throws std::runtime_error when the address is unusable.
  /// Port 0 picks an ephemeral port (see port()).
  ConsoleBridge(const BridgeConfig& cfg, ConsoleInputSource& input, int raw_range,
                double loop_rate_hz);
  ~ConsoleBridge();
  ConsoleBridge(const ConsoleBridge&) = delete;
  ConsoleBridge& operator=(const ConsoleBridge&) = delete;

  unsigned short port() const noexcept;

  /// Called by the loop after every tick; forwards every Nth record.
  void publish(const TelemetryRecord& rec);

  bool session_active() const noexcept;
  std::uint64_t messages_accepted() const noexcept;
  std::uint64_t messages_rejected() const noexcept;

  void stop();

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

}  // namespace flexinst
