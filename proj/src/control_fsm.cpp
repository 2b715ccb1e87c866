#include "flexinst/control_fsm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <utility>

#include "flexinst/errors.hpp"
#include "flexinst/units.hpp"

namespace flexinst {

std::string_view to_string(EventKind e) noexcept {
  switch (e) {
    case EventKind::InitOk: return "INIT_OK";
    case EventKind::InitFail: return "INIT_FAIL";
    case EventKind::EnablePressed: return "ENABLE_PRESSED";
    case EventKind::DisablePressed: return "DISABLE_PRESSED";
    case EventKind::FaultRaised: return "FAULT_RAISED";
    case EventKind::ResetSequence: return "RESET_SEQUENCE";
    case EventKind::Tick: return "TICK";
  }
  return "?";
}

Mode next_mode(Mode from, EventKind event) noexcept {
  if (event == EventKind::FaultRaised) return Mode::Fault;
  switch (from) {
    case Mode::Init:
      if (event == EventKind::InitOk) return Mode::Idle;
      if (event == EventKind::InitFail) return Mode::Fault;
      break;
    case Mode::Idle:
      if (event == EventKind::EnablePressed) return Mode::Teleop;
      break;
    case Mode::Teleop:
      if (event == EventKind::DisablePressed) return Mode::Idle;
      break;
    case Mode::Fault:
      if (event == EventKind::ResetSequence) return Mode::Init;
      break;
  }
  return from;
}

void FsmConfig::validate() const {
  if (!(rate_hz > 0.0)) throw DomainError("loop rate must be positive");
  if (!(reset_hold_s >= 0.0)) throw DomainError("reset hold time must be non-negative");
  if (!(tension_gain >= 1.0)) throw DomainError("tension gain must be >= 1");
  if (!(plausibility_factor > 0.0)) throw DomainError("plausibility factor must be positive");
  if (!(q3_margin_mm >= 0.0) || !(q1_margin_deg >= 0.0)) {
    throw DomainError("estimate margins must be non-negative");
  }
  if (stall_ticks <= 0) throw DomainError("stall ticks must be positive");
  if (enable_button == 0 || reset_buttons == 0) throw DomainError("buttons must be assigned");
}

Estimate estimate_state(const EncoderReadings& ticks, const EstimatorConfig& cfg) {
  const Transmission& tr = cfg.transmission;
  const double tpr = cfg.motor.ticks_per_rev;
  auto at = [&](MotorRole r) { return static_cast<double>(ticks[static_cast<std::size_t>(r)]); };

  Estimate e;
  auto flag = [&](std::string reason) {
    if (e.plausible) e.reason = std::move(reason);
    e.plausible = false;
  };

  const DisplacementRange range = valid_displacement_range(cfg.gripper, cfg.opening_limit_deg);
  double q3 = at(MotorRole::Gripper) * tr.gripper_mm_per_rev / tpr;
  if (q3 < range.min_mm - cfg.q3_margin_mm || q3 > range.max_mm + cfg.q3_margin_mm) {
    flag("gripper slider estimate " + std::to_string(q3) + " mm outside travel");
  }
  q3 = std::clamp(q3, range.min_mm, range.max_mm);

  const double tendon_max = max_tendon_travel(cfg.flexure);
  const double tendon_margin = tendon_rate_per_degree(cfg.flexure, 0.0) * cfg.q1_margin_deg;
  double tendon = at(MotorRole::Flex) * tr.tendon_mm_per_rev / tpr;
  if (tendon < -tendon_margin || tendon > tendon_max + tendon_margin) {
    flag("flexion tendon estimate " + std::to_string(tendon) + " mm outside travel");
  }
  tendon = std::clamp(tendon, 0.0, tendon_max);

  e.state.q1_deg = bend_from_tendon(cfg.flexure, tendon);
  e.state.q2_deg = wrap_degrees(at(MotorRole::Head) * tr.head_deg_per_rev / tpr);
  e.state.q3_mm = q3;
  e.state.q4_deg = wrap_degrees(at(MotorRole::Shaft) * tr.shaft_deg_per_rev / tpr);
  e.state.jaw = jaw_state(cfg.gripper, q3);
  return e;
}

Controller::Controller(ControllerConfig cfg, MotorBus& bus, InputSource& input)
    : cfg_(std::move(cfg)),
      bus_(bus),
      input_(input),
      pipeline_(cfg_.pipeline),
      slider_range_(valid_displacement_range(cfg_.estimator.gripper, cfg_.fsm.opening_limit_deg)) {
  cfg_.fsm.validate();
  cfg_.estimator.flexure.validate();
  cfg_.estimator.transmission.validate();
  cfg_.estimator.motor.validate();
  cfg_.estimator.opening_limit_deg = cfg_.fsm.opening_limit_deg;
  state_.estimated.jaw = jaw_state(cfg_.estimator.gripper, 0.0);
}

const ControllerState& Controller::initialize() {
  state_.mode = Mode::Init;
  run_init_checks();
  return state_;
}

void Controller::apply(EventKind event) {
  const Mode before = state_.mode;
  state_.mode = next_mode(before, event);
  if (state_.mode == before) return;
  if (state_.mode == Mode::Teleop) pipeline_.reset();
  if (before == Mode::Fault) state_.active_fault = FaultCause::None;
  if (state_.mode != Mode::Teleop) bus_.stop_all();
}

void Controller::raise_fault(FaultCause cause, std::string detail) {
  if (state_.mode != Mode::Fault) {
    state_.faults.push_back({state_.tick, cause, std::move(detail)});
    state_.active_fault = cause;
  }
  state_.mode = next_mode(state_.mode, EventKind::FaultRaised);
  bus_.stop_all();
}

void Controller::run_init_checks() {
  std::vector<std::pair<FaultCause, std::string>> failures;

  if (!bus_.is_open() && !bus_.open()) {
    failures.emplace_back(FaultCause::BusOpenFail, "motor bus did not open");
  } else {
    for (std::size_t i = 0; i < kDriverCount; ++i) {
      const auto id = static_cast<DriverId>(i);
      if (!bus_.probe(id)) {
        failures.emplace_back(FaultCause::DriverAbsent, std::string(to_string(id)) + " absent");
        continue;
      }
      try {
        bus_.configure_limits(id, cfg_.fsm.speed_limit, cfg_.fsm.accel_limit);
      } catch (const BusError& e) {
        failures.emplace_back(FaultCause::LimitConfigFail, e.what());
      }
    }
  }
  if (!input_.open()) failures.emplace_back(FaultCause::InputOpenFail, "input source did not open");

  bus_.stop_all();
  if (failures.empty()) {
    prev_ticks_.reset();
    stall_counts_.fill(0);
    omega_model_.fill(0.0);
    reset_hold_ticks_ = 0;
    apply(EventKind::InitOk);
    update_estimate();
    return;
  }
  state_.mode = next_mode(state_.mode, EventKind::InitFail);
  state_.active_fault = failures.front().first;
  for (auto& [cause, detail] : failures) {
    state_.faults.push_back({state_.tick, cause, std::move(detail)});
  }
}

void Controller::handle_buttons(std::uint32_t buttons, double dt_s) {
  const std::uint32_t en = cfg_.fsm.enable_button;
  const std::uint32_t rs = cfg_.fsm.reset_buttons;
  const bool chord = (buttons & rs) == rs;
  const bool enable_edge = (buttons & en) && !(prev_buttons_ & en);
  prev_buttons_ = buttons;

  if (enable_edge && !chord) {
    if (state_.mode == Mode::Idle) {
      apply(EventKind::EnablePressed);
    } else if (state_.mode == Mode::Teleop) {
      apply(EventKind::DisablePressed);
    }
  }

  if (!chord) {
    reset_hold_ticks_ = 0;
    return;
  }
  ++reset_hold_ticks_;
  const int needed = std::max(1, static_cast<int>(std::ceil(cfg_.fsm.reset_hold_s / dt_s - 1e-9)));
  if (reset_hold_ticks_ >= needed && state_.mode == Mode::Fault) {
    apply(EventKind::ResetSequence);
    reset_hold_ticks_ = 0;
  }
}

JointVelocityCommand Controller::apply_soft_limits(JointVelocityCommand cmd, double dt_s) const {
  // Holding v for one tick and then stopping comes to rest at
  // pos + v dt + omega tau, omega being the joint rate right now.
  const double tau = cfg_.estimator.motor.tau_s;
  auto limit = [dt_s, tau](double v, double pos, double rate, double lo, double hi) {
    const double coast = rate * tau;
    const double up = std::max(0.0, (hi - pos - coast) / dt_s);
    const double down = std::min(0.0, (lo - pos - coast) / dt_s);
    return std::clamp(v, down, up);
  };
  const Transmission& tr = cfg_.estimator.transmission;
  const InstrumentState& est = state_.estimated;
  auto omega = [&](MotorRole r) { return omega_model_[static_cast<std::size_t>(r)]; };

  const double q3_rate = omega(MotorRole::Gripper) / 360.0 * tr.gripper_mm_per_rev;
  cmd.q3_mm_s = limit(cmd.q3_mm_s, est.q3_mm, q3_rate, slider_range_.min_mm, slider_range_.max_mm);

  const double tendon_rate = omega(MotorRole::Flex) / 360.0 * tr.tendon_mm_per_rev;
  const double q1_rate = tendon_rate / tendon_rate_per_degree(cfg_.estimator.flexure, est.q1_deg);
  cmd.q1_deg_s = limit(cmd.q1_deg_s, est.q1_deg, q1_rate, 0.0, cfg_.estimator.flexure.max_bend_deg);
  return cmd;
}

void Controller::advance_speed_model(const MotorSpeeds& speeds, double dt_s) {
  const MotorParams& m = cfg_.estimator.motor;
  const double decay = std::exp(-dt_s / m.tau_s);
  for (std::size_t i = 0; i < kMotorCount; ++i) {
    const double target = static_cast<double>(speeds[i]) / kMaxSpeedCommand * m.omega_max_deg_s;
    omega_model_[i] = target + (omega_model_[i] - target) * decay;
  }
}

MotorSpeeds Controller::to_motor_speeds(const JointVelocityCommand& cmd) const {
  const Transmission& tr = cfg_.estimator.transmission;
  const MotorParams& m = cfg_.estimator.motor;
  const TendonSpeeds tendons = antagonistic_speeds(cfg_.estimator.flexure, state_.estimated.q1_deg,
                                                   cmd.q1_deg_s, cfg_.fsm.tension_gain);
  MotorSpeeds s{};
  auto set = [&](MotorRole r, double motor_deg_s) {
    s[static_cast<std::size_t>(r)] = speed_command_for(motor_deg_s, m);
  };
  set(MotorRole::Flex, tendons.flex_mm_s / tr.tendon_mm_per_rev * 360.0);
  set(MotorRole::Ext, tendons.ext_mm_s / tr.tendon_mm_per_rev * 360.0);
  set(MotorRole::Gripper, cmd.q3_mm_s / tr.gripper_mm_per_rev * 360.0);
  set(MotorRole::Head, cmd.q2_deg_s / tr.head_deg_per_rev * 360.0);
  set(MotorRole::Shaft, cmd.q4_deg_s / tr.shaft_deg_per_rev * 360.0);
  return s;
}

void Controller::update_estimate() {
  if (!bus_.is_open()) return;
  EncoderReadings ticks{};
  try {
    ticks = bus_.read_encoders();
  } catch (const BusError& e) {
    raise_fault(FaultCause::BusError, e.what());
    return;
  }

  if (prev_ticks_) {
    const MotorParams& m = cfg_.estimator.motor;
    const double per_tick = m.omega_max_deg_s * cfg_.fsm.period_s() / 360.0 * m.ticks_per_rev;
    const double jump_bound = cfg_.fsm.plausibility_factor * per_tick;
    const int stall_speed =
        static_cast<int>(std::ceil(cfg_.fsm.stall_fraction * kMaxSpeedCommand));
    for (std::size_t i = 0; i < kMotorCount; ++i) {
      const std::int64_t delta = ticks[i] - (*prev_ticks_)[i];
      if (std::abs(static_cast<double>(delta)) > jump_bound) {
        raise_fault(FaultCause::EncoderImplausible,
                    "encoder " + std::to_string(i) + " jumped " + std::to_string(delta) + " ticks");
      }
      if (delta == 0 && std::abs(state_.motor_speeds[i]) >= stall_speed) {
        if (++stall_counts_[i] >= cfg_.fsm.stall_ticks) {
          raise_fault(FaultCause::EncoderImplausible,
                      "encoder " + std::to_string(i) + " not moving under command");
        }
      } else {
        stall_counts_[i] = 0;
      }
    }
  }
  prev_ticks_ = ticks;

  Estimate est = estimate_state(ticks, cfg_.estimator);
  state_.estimated = est.state;
  if (!est.plausible) raise_fault(FaultCause::EncoderImplausible, est.reason);
}

void Controller::send_speeds(const MotorSpeeds& speeds) {
  try {
    for (std::size_t i = 0; i < kMotorCount; ++i) {
      const ChannelAddress addr = channel_of(static_cast<MotorRole>(i));
      bus_.send_speed({addr.driver, addr.channel, speeds[i]});
    }
  } catch (const BusTimeout& e) {
    raise_fault(FaultCause::BusTimeout, e.what());
  } catch (const BusError& e) {
    raise_fault(FaultCause::BusError, e.what());
  }
}

TelemetryRecord Controller::step(const TickInput& in, double dt_s) {
  ++state_.tick;
  if (state_.mode == Mode::Init) run_init_checks();

  // Console events in fixed order, then the device buttons.
  if ((in.events & event_bits::kInputLost) && state_.mode == Mode::Teleop) {
    raise_fault(FaultCause::InputLost, "operator session lost");
  }
  if (in.events & event_bits::kReset) apply(EventKind::ResetSequence);
  if (in.events & event_bits::kDisable) apply(EventKind::DisablePressed);
  if (in.events & event_bits::kEnable) apply(EventKind::EnablePressed);
  handle_buttons(in.raw.buttons, dt_s);

  // Encoders → state estimate, jaw angle from the kinematic model.
  update_estimate();

  PipelineOutput po{};
  JointVelocityCommand cmd{};
  MotorSpeeds speeds{};
  if (state_.mode == Mode::Teleop) {
    // Read, filter, map and prioritize, then soft limits against the fresh
    // estimate and the antagonistic bending split.
    po = pipeline_.process(in.raw);
    cmd = apply_soft_limits(po.command, dt_s);
    speeds = to_motor_speeds(cmd);
  }
  if (state_.mode == Mode::Teleop) {
    const bool finite = std::isfinite(cmd.q1_deg_s) && std::isfinite(cmd.q2_deg_s) &&
                        std::isfinite(cmd.q3_mm_s) && std::isfinite(cmd.q4_deg_s);
    if (!finite) raise_fault(FaultCause::CommandNaN, "non-finite joint command");
  }
  if (state_.mode == Mode::Teleop) send_speeds(speeds);
  if (state_.mode != Mode::Teleop) {
    cmd = {};
    speeds = {};
    bus_.stop_all();
  }
  state_.last_command = cmd;
  state_.motor_speeds = speeds;
  advance_speed_model(speeds, dt_s);

  TelemetryRecord rec;
  rec.tick = state_.tick;
  rec.mode = state_.mode;
  rec.events = in.events;
  rec.raw = in.raw;
  rec.filtered = po.filtered;
  rec.command = cmd;
  rec.motor_speeds = speeds;
  rec.q1_deg = state_.estimated.q1_deg;
  rec.q2_deg = state_.estimated.q2_deg;
  rec.q3_mm = state_.estimated.q3_mm;
  rec.q4_deg = state_.estimated.q4_deg;
  rec.theta_total_deg = state_.estimated.jaw.total_angle_deg;
  rec.tip_width_mm = state_.estimated.jaw.tip_width_mm;
  rec.fault = state_.active_fault;
  return rec;
}

}  // namespace flexinst
