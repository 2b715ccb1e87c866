#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "flexinst/actuation_sim.hpp"
#include "flexinst/input_pipeline.hpp"
#include "flexinst/input_source.hpp"

namespace flexinst {

enum class Mode : std::uint8_t { Init = 0, Idle, Teleop, Fault };

enum class FaultCause : std::uint8_t {
  None = 0,
  BusOpenFail,
  DriverAbsent,
  LimitConfigFail,
  InputOpenFail,
  BusTimeout,
  BusError,
  EncoderImplausible,
  CommandNaN,
  InputLost,
};

std::string_view to_string(Mode m) noexcept;
std::string_view to_string(FaultCause c) noexcept;
Mode mode_from_string(std::string_view s);
FaultCause fault_cause_from_string(std::string_view s);

/// One control-loop tick as seen from outside the controller.
struct TelemetryRecord {
  std::uint64_t tick = 0;
  Mode mode = Mode::Init;
  std::uint32_t events = 0;
  RawAxes raw;
  NormalizedAxes filtered;
  JointVelocityCommand command;
  MotorSpeeds motor_speeds{};
  double q1_deg = 0.0;
  double q2_deg = 0.0;
  double q3_mm = 0.0;
  double q4_deg = 0.0;
  double theta_total_deg = 0.0;
  double tip_width_mm = 0.0;
  FaultCause fault = FaultCause::None;

  TickInput input() const { return {raw, events}; }
  friend bool operator==(const TelemetryRecord&, const TelemetryRecord&) = default;
};

/// CSV with a header row and a units row; doubles are written in shortest
/// round-trip form so records survive a write/read cycle bit-for-bit.
class TelemetryWriter {
 public:
  explicit TelemetryWriter(std::ostream& out);
  void write(const TelemetryRecord& rec);

 private:
  std::ostream& out_;
};

std::string format_telemetry_row(const TelemetryRecord& rec);
std::string telemetry_header();
std::string telemetry_units();

void record_trace(const std::filesystem::path& path, const std::vector<TelemetryRecord>& records);
std::vector<TelemetryRecord> replay_trace(const std::filesystem::path& path);
std::vector<TelemetryRecord> parse_trace(std::istream& in);

}  // namespace flexinst
