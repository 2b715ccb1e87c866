#pragma once

#include <array>
#include <cstdint>

// Six-axis device input → per-DOF joint velocity commands:
// normalize → dead-zone → low-pass → map (Tz→q3, Rx→q4, Ry→q1, Rz→q2) → priority.

namespace flexinst {

enum class Axis : std::uint8_t { Tx = 0, Ty, Tz, Rx, Ry, Rz };
inline constexpr std::size_t kAxisCount = 6;

/// Button bits as reported by the device.
inline constexpr std::uint32_t kButtonLeft = 1u << 0;
inline constexpr std::uint32_t kButtonRight = 1u << 1;

struct RawAxes {
  std::array<int, kAxisCount> counts{};
  std::uint32_t buttons = 0;

  int operator[](Axis a) const noexcept { return counts[static_cast<std::size_t>(a)]; }
  int& operator[](Axis a) noexcept { return counts[static_cast<std::size_t>(a)]; }
  friend bool operator==(const RawAxes&, const RawAxes&) = default;
};

struct NormalizedAxes {
  std::array<double, kAxisCount> values{};

  double operator[](Axis a) const noexcept { return values[static_cast<std::size_t>(a)]; }
  double& operator[](Axis a) noexcept { return values[static_cast<std::size_t>(a)]; }
  friend bool operator==(const NormalizedAxes&, const NormalizedAxes&) = default;
};

enum class PriorityMode : std::uint8_t { AllAxes, DominantAxis };

struct JointGains {
  double q1_deg_s = 30.0;
  double q2_deg_s = 90.0;
  double q3_mm_s = 2.0;
  double q4_deg_s = 90.0;
};

struct PipelineConfig {
  int raw_range = 350;
  double dead_zone = 0.05;
  double filter_coeff = 0.2;
  /// Filter state below this magnitude snaps to 0 once the input is zero.
  double zero_snap = 1e-3;
  JointGains gains;
  PriorityMode priority = PriorityMode::DominantAxis;

  void validate() const;
};

struct JointVelocityCommand {
  double q1_deg_s = 0.0;  ///< bend
  double q2_deg_s = 0.0;  ///< distal head rotation
  double q3_mm_s = 0.0;   ///< gripper slider
  double q4_deg_s = 0.0;  ///< shaft rotation

  bool is_zero() const noexcept {
    return q1_deg_s == 0.0 && q2_deg_s == 0.0 && q3_mm_s == 0.0 && q4_deg_s == 0.0;
  }
  int nonzero_count() const noexcept {
    return (q1_deg_s != 0.0) + (q2_deg_s != 0.0) + (q3_mm_s != 0.0) + (q4_deg_s != 0.0);
  }
  friend bool operator==(const JointVelocityCommand&, const JointVelocityCommand&) = default;
};

NormalizedAxes normalize(const RawAxes& raw, int range);

double dead_zone(double x, double threshold);

double low_pass(double prev, double x, double coeff);

JointVelocityCommand map_axes(const NormalizedAxes& filtered, const PipelineConfig& cfg);

struct PipelineOutput {
  NormalizedAxes normalized;
  NormalizedAxes filtered;
  JointVelocityCommand command;
};

/// Stateful chain; owns the low-pass memory for one control loop.
class InputPipeline {
 public:
  explicit InputPipeline(PipelineConfig cfg);

  PipelineOutput process(const RawAxes& raw);
  void reset() noexcept { state_ = {}; }

  const NormalizedAxes& filter_state() const noexcept { return state_; }
  const PipelineConfig& config() const noexcept { return cfg_; }

 private:
  PipelineConfig cfg_;
  NormalizedAxes state_{};
};

}  // namespace flexinst
