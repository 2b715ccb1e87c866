#include "flexinst/flexure_model.hpp"

#include <algorithm>
#include <cmath>

#include "flexinst/errors.hpp"
#include "flexinst/units.hpp"

namespace flexinst {

void FlexureGeometry::validate() const {
  if (notches_per_side <= 0) throw DomainError("flexure needs at least one notch");
  if (!(notch_half_angle_deg > 0.0) || !(max_bend_deg > 0.0)) {
    throw DomainError("notch angle and max bend must be positive");
  }
  if (!(tendon_offset_mm > 0.0) || !(segment_pitch_mm > 0.0)) {
    throw DomainError("tendon offset and segment pitch must be positive");
  }
  if (notches_per_side * 2.0 * notch_half_angle_deg < max_bend_deg - 1e-12) {
    throw DomainError("notches cannot close enough to reach the rated bend");
  }
}

BendState tendon_from_bend(const FlexureGeometry& geom, double bend_deg) {
  if (!std::isfinite(bend_deg) || bend_deg < 0.0 || bend_deg > geom.max_bend_deg) {
    throw RangeError("bend angle outside [0, max bend]");
  }
  const int n = geom.notches_per_side;
  BendState st;
  st.bend_deg = bend_deg;
  st.per_notch_deg.assign(static_cast<std::size_t>(n), bend_deg / n);
  const double hinge = deg_to_rad(bend_deg) / (2.0 * n);
  st.flex_tendon_mm = 2.0 * n * geom.tendon_offset_mm * std::sin(hinge);
  st.ext_tendon_mm = st.flex_tendon_mm;
  return st;
}

double max_tendon_travel(const FlexureGeometry& geom) {
  return tendon_from_bend(geom, geom.max_bend_deg).flex_tendon_mm;
}

double bend_from_tendon(const FlexureGeometry& geom, double flex_tendon_mm) {
  if (!std::isfinite(flex_tendon_mm) || flex_tendon_mm < 0.0 ||
      flex_tendon_mm > max_tendon_travel(geom)) {
    throw RangeError("tendon displacement outside the flexure's travel");
  }
  const int n = geom.notches_per_side;
  const double s = std::min(1.0, flex_tendon_mm / (2.0 * n * geom.tendon_offset_mm));
  const double bend = rad_to_deg(2.0 * n * std::asin(s));
  return std::min(bend, geom.max_bend_deg);
}

double tendon_rate_per_degree(const FlexureGeometry& geom, double bend_deg) {
  const double hinge = deg_to_rad(bend_deg) / (2.0 * geom.notches_per_side);
  return geom.tendon_offset_mm * std::cos(hinge) * deg_to_rad(1.0);
}

TendonSpeeds antagonistic_speeds(const FlexureGeometry& geom, double bend_deg,
                                 double bend_velocity_deg_s, double tension_gain) {
  if (!(tension_gain >= 1.0)) throw DomainError("tension gain must be >= 1");
  const double k = tendon_rate_per_degree(geom, bend_deg);
  TendonSpeeds out;
  out.flex_mm_s = tension_gain * k * bend_velocity_deg_s;
  out.ext_mm_s = -k * bend_velocity_deg_s;
  return out;
}

}  // namespace flexinst
