#include "flexinst/gripper_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "flexinst/errors.hpp"
#include "flexinst/units.hpp"

namespace flexinst {
namespace {

// Round-off slack allowed on arccos/arcsin arguments before rejecting.
constexpr double kUnitSlack = 1e-12;

double checked_unit(double value, const char* what) {
  if (!std::isfinite(value) || std::abs(value) > 1.0 + kUnitSlack) {
    throw InfeasibleGeometry(std::string(what) + " argument " + std::to_string(value) +
                             " outside [-1, 1]");
  }
  return std::clamp(value, -1.0, 1.0);
}

double alpha_from_pivot_slider(const GripperGeometry& geom, double ps) {
  const double a = geom.link_a();
  const double b = geom.link_b();
  const double c = (b * b - a * a - ps * ps) / (-2.0 * a * ps);
  return rad_to_deg(std::acos(checked_unit(c, "law of cosines")));
}

double total_angle_at(const GripperGeometry& geom, double slider_mm) {
  return 2.0 * (alpha_from_displacement(geom, slider_mm) - geom.jaw_offset_angle());
}

// Largest dL for which PS stays strictly inside the feasible triangle.
double feasible_slider_max(const GripperGeometry& geom) {
  const double ps_min = std::abs(geom.link_a() - geom.link_b());
  const double span = geom.pivot_slider() - ps_min;
  return span - 1e-9 * std::max(1.0, span);
}

}  // namespace

GripperGeometry::GripperGeometry(double link_a_mm, double link_b_mm, double jaw_length_mm,
                                 double offset_mm, double pivot_slider_mm)
    : link_a_(link_a_mm),
      link_b_(link_b_mm),
      jaw_length_(jaw_length_mm),
      offset_(offset_mm),
      pivot_slider_(pivot_slider_mm),
      jaw_offset_deg_(0.0) {
  for (double v : {link_a_mm, link_b_mm, jaw_length_mm, offset_mm, pivot_slider_mm}) {
    if (!std::isfinite(v) || v <= 0.0) throw DomainError("gripper lengths must be positive");
  }
  if (offset_mm >= link_a_mm) throw DomainError("offset h must be shorter than linkage A");
  if (!(std::abs(link_a_mm - link_b_mm) < pivot_slider_mm &&
        pivot_slider_mm < link_a_mm + link_b_mm)) {
    throw DomainError("L0 does not close triangle PQS");
  }
  jaw_offset_deg_ = flexinst::jaw_offset_angle(link_a_mm, offset_mm);
}

GripperGeometry GripperGeometry::nominal() { return {6.50, 8.00, 22.3, 2.5, 13.6}; }

double jaw_offset_angle(double link_a_mm, double offset_mm) {
  if (!(link_a_mm > 0.0) || !(offset_mm >= 0.0) || !(offset_mm < link_a_mm)) {
    throw DomainError("jaw offset angle needs 0 <= h < A");
  }
  return rad_to_deg(std::asin(offset_mm / link_a_mm));
}

double jaw_offset_angle(const GripperGeometry& geom) { return geom.jaw_offset_angle(); }

double alpha_from_displacement(const GripperGeometry& geom, double slider_mm) {
  const double ps = geom.pivot_slider() - slider_mm;
  if (!std::isfinite(ps) || ps <= 0.0) {
    throw DomainError("pivot-to-slider distance must stay positive");
  }
  return alpha_from_pivot_slider(geom, ps);
}

InternalAngles internal_angles(const GripperGeometry& geom, double alpha_deg) {
  const double s = geom.link_a() * std::sin(deg_to_rad(alpha_deg)) / geom.link_b();
  InternalAngles out;
  out.alpha_b_deg = rad_to_deg(std::asin(checked_unit(s, "law of sines")));
  out.alpha_a_deg = alpha_deg + out.alpha_b_deg - 90.0;
  return out;
}

GripperState jaw_state(const GripperGeometry& geom, double slider_mm) {
  GripperState st;
  st.slider_mm = slider_mm;
  st.alpha_deg = alpha_from_displacement(geom, slider_mm);
  const InternalAngles ia = internal_angles(geom, st.alpha_deg);
  st.alpha_a_deg = ia.alpha_a_deg;
  st.alpha_b_deg = ia.alpha_b_deg;
  st.jaw_angle_deg = st.alpha_deg - geom.jaw_offset_angle();
  st.total_angle_deg = 2.0 * st.jaw_angle_deg;
  st.tip_width_mm = 2.0 * geom.jaw_length() * std::sin(deg_to_rad(st.total_angle_deg) / 2.0);
  return st;
}

ForceState force_transmission(const GripperGeometry& geom, double slider_mm, double input_n) {
  if (!std::isfinite(input_n) || input_n < 0.0) {
    throw DomainError("input force must be non-negative");
  }
  const GripperState st = jaw_state(geom, slider_mm);
  ForceState f;
  f.input_n = input_n;
  f.half_input_n = input_n / 2.0;
  f.link_b_n = f.half_input_n * std::cos(deg_to_rad(st.alpha_b_deg));
  f.link_a_n = f.link_b_n * std::cos(deg_to_rad(st.alpha_a_deg));
  f.tip_n = (geom.link_a() / geom.jaw_length()) * f.link_a_n;
  f.total_grip_n = 2.0 * f.tip_n;
  return f;
}

double virtual_work_tip_ratio(const GripperGeometry& geom, double slider_mm) {
  const double a = geom.link_a();
  const double b = geom.link_b();
  const double ps = geom.pivot_slider() - slider_mm;
  const double alpha = deg_to_rad(alpha_from_displacement(geom, slider_mm));
  // cos(alpha) = (A^2 + PS^2 - B^2) / (2 A PS); d/dPS of that, then chain rule
  // with dPS/dL = -1 gives dalpha/dL.
  const double dcos_dps = (ps * ps - a * a + b * b) / (2.0 * a * ps * ps);
  const double dalpha_dl = dcos_dps / std::sin(alpha);
  return 1.0 / (2.0 * geom.jaw_length() * dalpha_dl);
}

double displacement_from_total_angle(const GripperGeometry& geom, double total_angle_deg) {
  if (!std::isfinite(total_angle_deg)) throw RangeError("total angle must be finite");

  const double slider_hi = feasible_slider_max(geom);
  const double angle_lo = total_angle_at(geom, 0.0);
  constexpr double kAngleSlack = 1e-9;
  if (total_angle_deg < angle_lo - kAngleSlack) {
    throw RangeError("total angle below the rest configuration");
  }

  const double alpha = deg_to_rad(total_angle_deg / 2.0 + geom.jaw_offset_angle());
  const double a = geom.link_a();
  const double b = geom.link_b();
  const double ps_min = std::abs(a - b);
  const double ps_max = geom.pivot_slider();

  std::vector<double> candidates;
  const double disc = b * b - a * a * std::sin(alpha) * std::sin(alpha);
  if (alpha > 0.0 && alpha < std::numbers::pi && disc >= 0.0) {
    const double root = std::sqrt(disc);
    for (double ps : {a * std::cos(alpha) + root, a * std::cos(alpha) - root}) {
      if (ps > ps_min && ps <= ps_max + 1e-12) candidates.push_back(std::min(ps, ps_max));
    }
  }
  // Tie-break: the root nearest the rest configuration (largest PS).
  std::sort(candidates.begin(), candidates.end(), std::greater<>());
  for (double ps : candidates) {
    const double slider = ps_max - ps;
    if (slider > slider_hi) continue;
    if (std::abs(total_angle_at(geom, slider) - total_angle_deg) <= 1e-7) return slider;
  }

  // Bisection over dL, valid where the total angle is monotone on [0, slider_hi].
  const double angle_hi = total_angle_at(geom, slider_hi);
  if (total_angle_deg > angle_hi + kAngleSlack) {
    throw RangeError("total angle beyond the feasible linkage range");
  }
  double lo = 0.0;
  double hi = slider_hi;
  for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (total_angle_at(geom, mid) < total_angle_deg) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

DisplacementRange valid_displacement_range(const GripperGeometry& geom, double opening_limit_deg) {
  DisplacementRange r;
  if (!(opening_limit_deg > total_angle_at(geom, 0.0))) return r;
  const double slider_hi = feasible_slider_max(geom);
  if (opening_limit_deg >= total_angle_at(geom, slider_hi)) {
    r.max_mm = slider_hi;
  } else {
    r.max_mm = displacement_from_total_angle(geom, opening_limit_deg);
  }
  return r;
}

}  // namespace flexinst
