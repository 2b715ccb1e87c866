#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "flexinst/flexure_model.hpp"
#include "flexinst/gripper_model.hpp"
#include "flexinst/instrument_state.hpp"

// Simulated actuation layer: dual-channel speed drivers on a message bus,
// first-order gear-motors and integer shaft encoders, plus the joint
// transmissions that turn motor rotation into instrument motion.

namespace flexinst {

enum class DriverId : std::uint8_t { A = 0, B, C };
inline constexpr std::size_t kDriverCount = 3;
inline constexpr int kChannelsPerDriver = 2;
inline constexpr int kMaxSpeedCommand = 800;

std::string_view to_string(DriverId id) noexcept;

struct MotorBusCommand {
  DriverId driver = DriverId::A;
  int channel = 0;
  int speed = 0;  ///< saturates at +/-kMaxSpeedCommand
};

enum class MotorRole : std::uint8_t { Flex = 0, Ext, Gripper, Head, Shaft };
inline constexpr std::size_t kMotorCount = 5;

struct ChannelAddress {
  DriverId driver;
  int channel;
};

/// Fixed wiring: A0 flexion, A1 extension, B0 gripper, B1 head, C0 shaft.
constexpr ChannelAddress channel_of(MotorRole role) noexcept {
  switch (role) {
    case MotorRole::Flex: return {DriverId::A, 0};
    case MotorRole::Ext: return {DriverId::A, 1};
    case MotorRole::Gripper: return {DriverId::B, 0};
    case MotorRole::Head: return {DriverId::B, 1};
    case MotorRole::Shaft: return {DriverId::C, 0};
  }
  return {DriverId::C, 1};
}

struct MotorParams {
  double omega_max_deg_s = 360.0;  ///< output shaft speed at full command
  double tau_s = 0.03;
  int ticks_per_rev = 1200;  ///< 12 CPR x 100:1 gearbox

  void validate() const;
};

using EncoderReadings = std::array<std::int64_t, kMotorCount>;
using MotorSpeeds = std::array<int, kMotorCount>;

/// Driver-side interface the controller talks to.
class MotorBus {
 public:
  virtual ~MotorBus() = default;

  virtual bool open() = 0;
  virtual bool is_open() const = 0;
  virtual bool probe(DriverId driver) = 0;
  virtual void configure_limits(DriverId driver, int max_speed, int max_accel) = 0;
  /// Throws BusError when the bus is not open or the target is unknown and
  /// BusTimeout when the driver does not acknowledge.
  virtual void send_speed(const MotorBusCommand& cmd) = 0;
  /// Forces every channel to zero; cannot fail.
  virtual void stop_all() noexcept = 0;
  virtual EncoderReadings read_encoders() = 0;
};

class SimMotor {
 public:
  explicit SimMotor(MotorParams params = {}) : params_(params) {}

  void set_command(int speed) noexcept;
  /// Exact solution of omega' = (target - omega) / tau over dt at constant target.
  void step(double dt_s) noexcept;

  double target() const noexcept { return target_; }
  double omega() const noexcept { return omega_; }
  double angle_deg() const noexcept { return angle_deg_; }
  std::int64_t ticks() const noexcept;

  void set_stuck(bool stuck) noexcept;
  void add_glitch(std::int64_t ticks) noexcept { glitch_ += ticks; }

 private:
  MotorParams params_;
  double target_ = 0.0;
  double omega_ = 0.0;
  double angle_deg_ = 0.0;
  bool stuck_ = false;
  std::int64_t stuck_value_ = 0;
  std::int64_t glitch_ = 0;
};

class SimMotorBus final : public MotorBus {
 public:
  explicit SimMotorBus(MotorParams params = {});

  bool open() override;
  bool is_open() const override { return open_; }
  bool probe(DriverId driver) override;
  void configure_limits(DriverId driver, int max_speed, int max_accel) override;
  void send_speed(const MotorBusCommand& cmd) override;
  void stop_all() noexcept override;
  EncoderReadings read_encoders() override;

  void step(double dt_s) noexcept;

  const SimMotor& motor(MotorRole role) const noexcept {
    return motors_[static_cast<std::size_t>(role)];
  }
  int limit(DriverId driver) const noexcept { return limits_[static_cast<std::size_t>(driver)]; }
  const MotorParams& params() const noexcept { return params_; }

  // Fault injection.
  void set_bus_available(bool available) noexcept { bus_available_ = available; }
  void set_driver_present(DriverId driver, bool present) noexcept {
    present_[static_cast<std::size_t>(driver)] = present;
  }
  /// The next `count` send_speed calls time out.
  void inject_timeouts(int count) noexcept { pending_timeouts_ += count; }
  void set_encoder_stuck(MotorRole role, bool stuck) noexcept {
    motors_[static_cast<std::size_t>(role)].set_stuck(stuck);
  }
  void inject_encoder_glitch(MotorRole role, std::int64_t ticks) noexcept {
    motors_[static_cast<std::size_t>(role)].add_glitch(ticks);
  }

 private:
  SimMotor& motor_at(const ChannelAddress& addr);

  MotorParams params_;
  std::array<SimMotor, kMotorCount> motors_;
  std::array<bool, kDriverCount> present_{true, true, true};
  std::array<int, kDriverCount> limits_{kMaxSpeedCommand, kMaxSpeedCommand, kMaxSpeedCommand};
  bool bus_available_ = true;
  bool open_ = false;
  int pending_timeouts_ = 0;
};

/// Motor-to-joint transmissions.
struct Transmission {
  double gripper_mm_per_rev = 2.4;  ///< capstan wire travel
  double tendon_mm_per_rev = 4.0;
  double head_deg_per_rev = 360.0;
  double shaft_deg_per_rev = 360.0;

  void validate() const;

  double gripper_mm_per_tick(const MotorParams& m) const { return gripper_mm_per_rev / m.ticks_per_rev; }
  double tendon_mm_per_tick(const MotorParams& m) const { return tendon_mm_per_rev / m.ticks_per_rev; }
  double head_deg_per_tick(const MotorParams& m) const { return head_deg_per_rev / m.ticks_per_rev; }
  double shaft_deg_per_tick(const MotorParams& m) const { return shaft_deg_per_rev / m.ticks_per_rev; }
};

/// Motor output-shaft speed (deg/s) to bus speed command, rounded and saturated.
int speed_command_for(double motor_deg_s, const MotorParams& params) noexcept;

struct PlantConfig {
  MotorParams motor;
  Transmission transmission;
  FlexureGeometry flexure;
  GripperGeometry gripper = GripperGeometry::nominal();
};

/// Ground truth of the simulated instrument, integrated from the motor shafts.
struct PlantTruth {
  InstrumentState state;
  double flex_tendon_mm = 0.0;
  double ext_tendon_mm = 0.0;
  bool jaw_valid = true;
};

class FourDofPlant {
 public:
  explicit FourDofPlant(PlantConfig cfg);

  SimMotorBus& bus() noexcept { return bus_; }
  const SimMotorBus& bus() const noexcept { return bus_; }
  const PlantConfig& config() const noexcept { return cfg_; }

  void step(double dt_s) noexcept { bus_.step(dt_s); }
  PlantTruth truth() const;

 private:
  PlantConfig cfg_;
  SimMotorBus bus_;
};

}  // namespace flexinst
