#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flexinst/actuation_sim.hpp"
#include "flexinst/flexure_model.hpp"
#include "flexinst/gripper_model.hpp"
#include "flexinst/input_pipeline.hpp"
#include "flexinst/input_source.hpp"
#include "flexinst/instrument_state.hpp"
#include "flexinst/telemetry.hpp"

/*
 * Controller state machine.
 *
 *        INIT_OK              ENABLE_PRESSED
 *   INIT ───────► IDLE ◄──────────────────► TELEOP
 *     │  ▲              DISABLE_PRESSED
 *     │  │ RESET_SEQUENCE
 *     │  └────────── FAULT ◄── FAULT_RAISED (from any state)
 *     └─ INIT_FAIL ──►
 *
 * Motors only move in TELEOP; every other mode forces zero speed.
 */

namespace flexinst {

enum class EventKind : std::uint8_t {
  InitOk = 0,
  InitFail,
  EnablePressed,
  DisablePressed,
  FaultRaised,
  ResetSequence,
  Tick,
};

inline constexpr std::array kAllModes{Mode::Init, Mode::Idle, Mode::Teleop, Mode::Fault};
inline constexpr std::array kAllEvents{EventKind::InitOk,        EventKind::InitFail,
                                       EventKind::EnablePressed, EventKind::DisablePressed,
                                       EventKind::FaultRaised,   EventKind::ResetSequence,
                                       EventKind::Tick};

std::string_view to_string(EventKind e) noexcept;

/// Transition table; events not listed for a mode leave it unchanged.
Mode next_mode(Mode from, EventKind event) noexcept;

struct FsmConfig {
  double rate_hz = 100.0;
  double reset_hold_s = 2.0;
  std::uint32_t enable_button = kButtonLeft;
  std::uint32_t reset_buttons = kButtonLeft | kButtonRight;
  double opening_limit_deg = kDefaultOpeningLimitDeg;
  double tension_gain = 1.0;
  /// Encoder jump bound as a multiple of the full-speed tick rate.
  double plausibility_factor = 1.5;
  double q3_margin_mm = 0.1;
  double q1_margin_deg = 2.0;
  /// Stall detector: command magnitude (fraction of full scale) held for
  /// `stall_ticks` ticks without an encoder change.
  double stall_fraction = 0.25;
  int stall_ticks = 20;
  int speed_limit = kMaxSpeedCommand;
  int accel_limit = 400;

  double period_s() const noexcept { return 1.0 / rate_hz; }
  void validate() const;
};

struct FaultRecord {
  std::uint64_t tick = 0;
  FaultCause cause = FaultCause::None;
  std::string detail;
};

struct ControllerState {
  Mode mode = Mode::Init;
  std::uint64_t tick = 0;
  JointVelocityCommand last_command;
  MotorSpeeds motor_speeds{};
  InstrumentState estimated;
  FaultCause active_fault = FaultCause::None;
  std::vector<FaultRecord> faults;
};

struct EstimatorConfig {
  GripperGeometry gripper = GripperGeometry::nominal();
  FlexureGeometry flexure;
  Transmission transmission;
  MotorParams motor;
  double opening_limit_deg = kDefaultOpeningLimitDeg;
  double q3_margin_mm = 0.1;
  double q1_margin_deg = 2.0;
};

struct Estimate {
  InstrumentState state;
  bool plausible = true;
  std::string reason;
};

/// Encoder ticks → joint state. q3 and q1 within their margin of the valid
/// range are clamped into it; further out the estimate is flagged implausible.
Estimate estimate_state(const EncoderReadings& ticks, const EstimatorConfig& cfg);

struct ControllerConfig {
  EstimatorConfig estimator;
  PipelineConfig pipeline;
  FsmConfig fsm;
};

class Controller {
 public:
  Controller(ControllerConfig cfg, MotorBus& bus, InputSource& input);

  /// Runs the INIT checks (bus, drivers, limits, input source) and lands in
  /// IDLE or FAULT.
  const ControllerState& initialize();

  /// One fixed-period loop iteration. `dt_s` must equal the configured period.
  TelemetryRecord step(const TickInput& in, double dt_s);

  const ControllerState& state() const noexcept { return state_; }
  const ControllerConfig& config() const noexcept { return cfg_; }
  const DisplacementRange& slider_range() const noexcept { return slider_range_; }

 private:
  void apply(EventKind event);
  void raise_fault(FaultCause cause, std::string detail);
  void run_init_checks();
  void handle_buttons(std::uint32_t buttons, double dt_s);
  JointVelocityCommand apply_soft_limits(JointVelocityCommand cmd, double dt_s) const;
  MotorSpeeds to_motor_speeds(const JointVelocityCommand& cmd) const;
  void update_estimate();
  void send_speeds(const MotorSpeeds& speeds);
  void advance_speed_model(const MotorSpeeds& speeds, double dt_s);

  ControllerConfig cfg_;
  MotorBus& bus_;
  InputSource& input_;
  InputPipeline pipeline_;
  DisplacementRange slider_range_;
  ControllerState state_;
  std::optional<EncoderReadings> prev_ticks_;
  std::array<int, kMotorCount> stall_counts_{};
  /// Motor shaft speeds (deg/s) predicted from the commands sent so far.
  std::array<double, kMotorCount> omega_model_{};
  std::uint32_t prev_buttons_ = 0;
  int reset_hold_ticks_ = 0;
};

}  // namespace flexinst
