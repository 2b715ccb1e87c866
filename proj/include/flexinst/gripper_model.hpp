#pragma once

// Closed-form kinematics and quasi-static force transmission of the
// symmetric scissor-linkage gripper. Only one half of the mechanism is
// modeled; the other half mirrors it about the instrument axis.
//
// Triangle PQS: P is the fixed jaw pivot, Q the joint between linkage A
// (P-Q) and linkage B (Q-S), S the slider point on the axis. The slider
// displacement dL shortens PS = L0 - dL and opens the jaws.
//
// All angles are in degrees, lengths in mm, forces in N.

namespace flexinst {

class GripperGeometry {
 public:
  /// Throws DomainError unless all lengths are positive, offset < link_a and
  /// |A - B| < L0 < A + B.
  GripperGeometry(double link_a_mm, double link_b_mm, double jaw_length_mm, double offset_mm,
                  double pivot_slider_mm);

  /// The prototype's linkage: A 6.5, B 8.0, l_j 22.3, h 2.5, L0 13.6.
  static GripperGeometry nominal();

  double link_a() const noexcept { return link_a_; }
  double link_b() const noexcept { return link_b_; }
  double jaw_length() const noexcept { return jaw_length_; }
  double offset() const noexcept { return offset_; }
  double pivot_slider() const noexcept { return pivot_slider_; }
  /// arcsin(h / A), fixed at construction.
  double jaw_offset_angle() const noexcept { return jaw_offset_deg_; }

  friend bool operator==(const GripperGeometry&, const GripperGeometry&) = default;

 private:
  double link_a_;
  double link_b_;
  double jaw_length_;
  double offset_;
  double pivot_slider_;
  double jaw_offset_deg_;
};

struct GripperState {
  double slider_mm = 0.0;
  double alpha_deg = 0.0;     ///< angle at P between PQ and PS
  double alpha_a_deg = 0.0;   ///< force-transfer angle at Q (may be negative near closure)
  double alpha_b_deg = 0.0;   ///< angle at S between SQ and SP
  double jaw_angle_deg = 0.0;
  double total_angle_deg = 0.0;
  double tip_width_mm = 0.0;
};

struct ForceState {
  double input_n = 0.0;
  double half_input_n = 0.0;
  double link_b_n = 0.0;
  double link_a_n = 0.0;
  double tip_n = 0.0;
  double total_grip_n = 0.0;
};

struct InternalAngles {
  double alpha_b_deg = 0.0;
  double alpha_a_deg = 0.0;
};

struct DisplacementRange {
  double min_mm = 0.0;
  double max_mm = 0.0;

  bool contains(double slider_mm) const noexcept {
    return slider_mm >= min_mm && slider_mm <= max_mm;
  }
};

inline constexpr double kDefaultOpeningLimitDeg = 90.0;

/// arcsin(h / A) in degrees. Accepts 0 <= h < A.
double jaw_offset_angle(double link_a_mm, double offset_mm);
double jaw_offset_angle(const GripperGeometry& geom);

/// Angle at P from the law of cosines on PQS. Throws DomainError when
/// PS <= 0 and InfeasibleGeometry when the triangle cannot close.
double alpha_from_displacement(const GripperGeometry& geom, double slider_mm);

InternalAngles internal_angles(const GripperGeometry& geom, double alpha_deg);

GripperState jaw_state(const GripperGeometry& geom, double slider_mm);

ForceState force_transmission(const GripperGeometry& geom, double slider_mm, double input_n);

/// Tip force per unit input force implied by virtual work (F_IN dL = 2 F_T l_j dtheta_jaw).
/// Diagnostic only: the projection-based force model does not reduce to it.
double virtual_work_tip_ratio(const GripperGeometry& geom, double slider_mm);

/// Inverse kinematics: slider displacement producing the given total jaw
/// angle. Closed-form root of PS^2 - 2A cos(alpha) PS + (A^2 - B^2) = 0 with
/// PS in (|A - B|, L0]; falls back to bisection. Throws RangeError when the
/// angle is not reachable with dL >= 0.
double displacement_from_total_angle(const GripperGeometry& geom, double total_angle_deg);

/// [0, dL at which total angle reaches `opening_limit_deg`], capped at the
/// triangle feasibility boundary.
DisplacementRange valid_displacement_range(const GripperGeometry& geom,
                                           double opening_limit_deg = kDefaultOpeningLimitDeg);

}  // namespace flexinst
