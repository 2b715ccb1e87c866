#pragma once

#include <vector>

// Notched flexure as a serial chain of identical compliant hinges. Bending
// is single-plane and one-sided, spread uniformly over the notches; each
// tendon sits `tendon_offset_mm` from the neutral axis, so a hinge closing
// by phi changes its tendon path by 2 r sin(phi / 2).

namespace flexinst {

struct FlexureGeometry {
  double notch_half_angle_deg = 7.5;
  int notches_per_side = 6;
  double max_bend_deg = 90.0;
  double tendon_offset_mm = 3.0;
  double segment_pitch_mm = 1.5;

  /// Throws DomainError if the notch capacity n * 2 * half-angle cannot
  /// cover max_bend_deg or a length is non-positive.
  void validate() const;
};

struct BendState {
  double bend_deg = 0.0;
  std::vector<double> per_notch_deg;
  double flex_tendon_mm = 0.0;  ///< flexion tendon shortening
  double ext_tendon_mm = 0.0;   ///< extension tendon lengthening
};

/// Take-up rates of the two tendons; positive means the motor reels in.
struct TendonSpeeds {
  double flex_mm_s = 0.0;
  double ext_mm_s = 0.0;
};

BendState tendon_from_bend(const FlexureGeometry& geom, double bend_deg);

/// Inverse of tendon_from_bend on [0, tendon at max bend].
double bend_from_tendon(const FlexureGeometry& geom, double flex_tendon_mm);

/// Tendon displacement at the rated maximum bend.
double max_tendon_travel(const FlexureGeometry& geom);

/// d(tendon)/d(bend) in mm per degree at `bend_deg`.
double tendon_rate_per_degree(const FlexureGeometry& geom, double bend_deg);

/// flex = +gain * k * v, ext = -k * v with k the local tendon derivative.
/// With gain >= 1 the flexion side never takes up slower than the extension
/// side pays out.
TendonSpeeds antagonistic_speeds(const FlexureGeometry& geom, double bend_deg,
                                 double bend_velocity_deg_s, double tension_gain = 1.0);

}  // namespace flexinst
