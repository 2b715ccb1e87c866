#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "flexinst/input_pipeline.hpp"
#include "flexinst/telemetry.hpp"

// Console wire protocol: one JSON object per WebSocket text message,
// discriminated by "type". Field names and units are listed in docs/protocol.md.

namespace flexinst::protocol {

inline constexpr int kVersion = 1;

struct Hello {
  std::string client;
};

/// Axis values are normalized to [-1, 1] in the order tx, ty, tz, rx, ry, rz.
struct Axes {
  std::array<double, 6> values{};
  std::uint32_t buttons = 0;
};

enum class Command : std::uint8_t { Enable, Disable, Reset };

enum class Injection : std::uint8_t { BusTimeout, EncoderStuck, EncoderGlitch, DriverAbsent, Clear };

struct FaultInject {
  Injection fault = Injection::Clear;
};

using ClientMessage = std::variant<Hello, Axes, Command, FaultInject>;

/// Throws ProtocolError describing the first problem found.
ClientMessage parse_client_message(std::string_view text);

std::string_view message_type(const ClientMessage& msg) noexcept;

RawAxes to_raw_axes(const Axes& axes, int raw_range);
std::uint32_t to_events(Command c) noexcept;
std::uint32_t to_events(Injection i) noexcept;
std::string_view to_string(Injection i) noexcept;

struct StateSnapshot {
  std::uint64_t tick = 0;
  Mode mode = Mode::Init;
  double q1_deg = 0.0;
  double q2_deg = 0.0;
  double q3_mm = 0.0;
  double q4_deg = 0.0;
  double theta_total_deg = 0.0;
  double tip_width_mm = 0.0;
  std::vector<FaultCause> faults;
};

StateSnapshot snapshot_of(const TelemetryRecord& rec);

std::string encode_state(const StateSnapshot& s);
std::string encode_welcome(double rate_hz, double snapshot_hz, bool fault_inject);
std::string encode_error(std::string_view reason);
std::string encode_busy();

/// Inverse of encode_state, for clients and tests.
StateSnapshot decode_state(std::string_view text);

}  // namespace flexinst::protocol
