#include "flexinst/actuation_sim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "flexinst/errors.hpp"
#include "flexinst/units.hpp"

namespace flexinst {

std::string_view to_string(DriverId id) noexcept {
  switch (id) {
    case DriverId::A: return "DRIVER_A";
    case DriverId::B: return "DRIVER_B";
    case DriverId::C: return "DRIVER_C";
  }
  return "DRIVER_?";
}

void MotorParams::validate() const {
  if (!(omega_max_deg_s > 0.0)) throw DomainError("omega max must be positive");
  if (!(tau_s > 0.0)) throw DomainError("motor time constant must be positive");
  if (ticks_per_rev <= 0) throw DomainError("ticks per revolution must be positive");
}

void Transmission::validate() const {
  if (!(gripper_mm_per_rev > 0.0 && tendon_mm_per_rev > 0.0 && head_deg_per_rev > 0.0 &&
        shaft_deg_per_rev > 0.0)) {
    throw DomainError("transmission ratios must be positive");
  }
}

int speed_command_for(double motor_deg_s, const MotorParams& params) noexcept {
  if (!std::isfinite(motor_deg_s)) return 0;
  const double scaled = motor_deg_s / params.omega_max_deg_s * kMaxSpeedCommand;
  const double clamped = std::clamp(scaled, -double(kMaxSpeedCommand), double(kMaxSpeedCommand));
  return static_cast<int>(std::lround(clamped));
}

// --- SimMotor ---------------------------------------------------------------

void SimMotor::set_command(int speed) noexcept {
  const int s = std::clamp(speed, -kMaxSpeedCommand, kMaxSpeedCommand);
  target_ = static_cast<double>(s) / kMaxSpeedCommand * params_.omega_max_deg_s;
}

void SimMotor::step(double dt_s) noexcept {
  if (!(dt_s > 0.0)) return;
  const double decay = std::exp(-dt_s / params_.tau_s);
  const double error = omega_ - target_;
  angle_deg_ += target_ * dt_s + error * params_.tau_s * (1.0 - decay);
  omega_ = target_ + error * decay;
}

std::int64_t SimMotor::ticks() const noexcept {
  if (stuck_) return stuck_value_ + glitch_;
  const double revs = angle_deg_ / 360.0;
  return static_cast<std::int64_t>(std::floor(revs * params_.ticks_per_rev)) + glitch_;
}

void SimMotor::set_stuck(bool stuck) noexcept {
  if (stuck && !stuck_) {
    stuck_value_ = static_cast<std::int64_t>(std::floor(angle_deg_ / 360.0 * params_.ticks_per_rev));
  }
  stuck_ = stuck;
}

// --- SimMotorBus ------------------------------------------------------------

SimMotorBus::SimMotorBus(MotorParams params) : params_(params) {
  params_.validate();
  motors_.fill(SimMotor(params_));
}

bool SimMotorBus::open() {
  open_ = bus_available_;
  return open_;
}

bool SimMotorBus::probe(DriverId driver) {
  return open_ && present_[static_cast<std::size_t>(driver)];
}

void SimMotorBus::configure_limits(DriverId driver, int max_speed, int /*max_accel*/) {
  if (!open_) throw BusError("bus not initialized");
  limits_[static_cast<std::size_t>(driver)] = std::clamp(max_speed, 0, kMaxSpeedCommand);
}

SimMotor& SimMotorBus::motor_at(const ChannelAddress& addr) {
  for (std::size_t i = 0; i < kMotorCount; ++i) {
    const ChannelAddress a = channel_of(static_cast<MotorRole>(i));
    if (a.driver == addr.driver && a.channel == addr.channel) return motors_[i];
  }
  throw BusError("no motor wired to " + std::string(to_string(addr.driver)) + " channel " +
                 std::to_string(addr.channel));
}

void SimMotorBus::send_speed(const MotorBusCommand& cmd) {
  if (!open_) throw BusError("bus not initialized");
  if (static_cast<std::size_t>(cmd.driver) >= kDriverCount || cmd.channel < 0 ||
      cmd.channel >= kChannelsPerDriver) {
    throw BusError("unknown driver or channel");
  }
  if (!present_[static_cast<std::size_t>(cmd.driver)]) {
    throw BusTimeout(std::string(to_string(cmd.driver)) + " not responding");
  }
  if (pending_timeouts_ > 0) {
    --pending_timeouts_;
    throw BusTimeout(std::string(to_string(cmd.driver)) + " acknowledge timeout");
  }
  const int limit = limits_[static_cast<std::size_t>(cmd.driver)];
  motor_at({cmd.driver, cmd.channel}).set_command(std::clamp(cmd.speed, -limit, limit));
}

void SimMotorBus::stop_all() noexcept {
  for (auto& m : motors_) m.set_command(0);
}

EncoderReadings SimMotorBus::read_encoders() {
  if (!open_) throw BusError("bus not initialized");
  EncoderReadings out{};
  for (std::size_t i = 0; i < kMotorCount; ++i) out[i] = motors_[i].ticks();
  return out;
}

void SimMotorBus::step(double dt_s) noexcept {
  for (auto& m : motors_) m.step(dt_s);
}

// --- FourDofPlant -----------------------------------------------------------

FourDofPlant::FourDofPlant(PlantConfig cfg) : cfg_(cfg), bus_(cfg.motor) {
  cfg_.transmission.validate();
  cfg_.flexure.validate();
}

PlantTruth FourDofPlant::truth() const {
  const Transmission& tr = cfg_.transmission;
  auto revs = [&](MotorRole r) { return bus_.motor(r).angle_deg() / 360.0; };

  PlantTruth t;
  t.flex_tendon_mm = revs(MotorRole::Flex) * tr.tendon_mm_per_rev;
  t.ext_tendon_mm = -revs(MotorRole::Ext) * tr.tendon_mm_per_rev;
  // A slack flexion tendon leaves the flexure straight; full travel is the mechanical stop.
  const double tendon = std::clamp(t.flex_tendon_mm, 0.0, max_tendon_travel(cfg_.flexure));
  t.state.q1_deg = bend_from_tendon(cfg_.flexure, tendon);
  t.state.q2_deg = wrap_degrees(revs(MotorRole::Head) * tr.head_deg_per_rev);
  t.state.q3_mm = revs(MotorRole::Gripper) * tr.gripper_mm_per_rev;
  t.state.q4_deg = wrap_degrees(revs(MotorRole::Shaft) * tr.shaft_deg_per_rev);
  try {
    t.state.jaw = jaw_state(cfg_.gripper, t.state.q3_mm);
  } catch (const std::exception&) {
    t.jaw_valid = false;
  }
  return t;
}

}  // namespace flexinst
