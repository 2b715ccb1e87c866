#include "flexinst/validation.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <random>
#include <string>

#include "csv.hpp"
#include "flexinst/errors.hpp"
#include "flexinst/units.hpp"

namespace flexinst {
namespace {

using Eigen::Vector3d;

constexpr double kDegenerateLength = 1e-9;

constexpr std::string_view kRefHeader = "slider,totalAngle";
constexpr std::string_view kRefUnits = "mm,deg";
constexpr std::string_view kMarkerHeader =
    "timestamp,jl_x,jl_y,jl_z,jr_x,jr_y,jr_z,p_x,p_y,p_z,f_x,f_y,f_z";
constexpr std::string_view kMarkerUnits = "s,mm,mm,mm,mm,mm,mm,mm,mm,mm,mm,mm,mm";

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

// Reads header + units, then hands each data row (split) to `row`.
template <typename Fn>
void read_table(const std::filesystem::path& path, std::string_view header, std::string_view units,
                std::size_t columns, Fn&& row) {
  std::ifstream in = open_in(path);
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError(line_no, "empty file");
  csv::expect_header(line, header, line_no);
  ++line_no;
  if (!std::getline(in, line)) throw ParseError(line_no, "missing units row");
  csv::expect_header(line, units, line_no);
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = csv::split(line);
    if (fields.size() != columns) {
      throw ParseError(line_no, "expected " + std::to_string(columns) + " fields, got " +
                                    std::to_string(fields.size()));
    }
    row(fields, line_no);
  }
}

}  // namespace

double jaw_angle_from_markers(const MarkerFrame& frame) {
  const Vector3d left = frame[MarkerLabel::JawLeftTip] - frame[MarkerLabel::Pivot];
  const Vector3d right = frame[MarkerLabel::JawRightTip] - frame[MarkerLabel::Pivot];
  if (left.norm() < kDegenerateLength || right.norm() < kDegenerateLength) {
    throw DomainError("degenerate marker frame: jaw tip coincides with pivot");
  }
  // atan2 form of arccos(a.b / |a||b|), well conditioned near 0 and 180 deg.
  return rad_to_deg(std::atan2(left.cross(right).norm(), left.dot(right)));
}

double displacement_from_markers(const MarkerFrame& frame, const MarkerFrame& baseline) {
  const Vector3d axis = baseline[MarkerLabel::Flange] - baseline[MarkerLabel::Pivot];
  if (axis.norm() < kDegenerateLength) {
    throw DomainError("degenerate baseline: flange coincides with pivot");
  }
  const Vector3d moved = frame[MarkerLabel::Flange] - baseline[MarkerLabel::Flange];
  return -moved.dot(axis.normalized());
}

MarkerFrame project_to_gripper_plane(const MarkerFrame& frame) {
  const Vector3d& pivot = frame[MarkerLabel::Pivot];
  const Vector3d axis = frame[MarkerLabel::Flange] - pivot;
  const Vector3d chord = frame[MarkerLabel::JawLeftTip] - frame[MarkerLabel::JawRightTip];
  const Vector3d normal = axis.cross(chord);
  if (axis.norm() < kDegenerateLength || normal.norm() < kDegenerateLength * std::max(1.0, axis.norm() * chord.norm())) {
    return frame;
  }
  const Vector3d n = normal.normalized();
  MarkerFrame out = frame;
  for (MarkerLabel tip : {MarkerLabel::JawLeftTip, MarkerLabel::JawRightTip}) {
    const Vector3d rel = frame[tip] - pivot;
    out[tip] = frame[tip] - rel.dot(n) * n;
  }
  return out;
}

std::vector<ReferenceConfig> references_from_markers(const std::vector<MarkerFrame>& frames) {
  if (frames.empty()) throw DomainError("no marker frames");
  std::vector<ReferenceConfig> refs;
  refs.reserve(frames.size());
  const MarkerFrame& baseline = frames.front();
  for (const MarkerFrame& f : frames) {
    refs.push_back({displacement_from_markers(f, baseline),
                    jaw_angle_from_markers(project_to_gripper_plane(f))});
  }
  return refs;
}

std::string_view to_string(ReferenceSource s) noexcept {
  return s == ReferenceSource::Cad ? "CAD" : "MOCAP";
}

std::vector<CurvePoint> model_curve(const GripperGeometry& geom, double slider_min_mm,
                                    double slider_max_mm, std::size_t points) {
  std::vector<CurvePoint> curve;
  if (points == 0) return curve;
  curve.reserve(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double t = points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(points - 1);
    const double slider = slider_min_mm + t * (slider_max_mm - slider_min_mm);
    curve.push_back({slider, jaw_state(geom, slider).total_angle_deg});
  }
  return curve;
}

ValidationReport validate(const std::vector<ReferenceConfig>& references,
                          const GripperGeometry& geom, ReferenceSource source,
                          double opening_limit_deg, std::size_t curve_points) {
  if (references.empty()) throw DomainError("validation needs at least one reference");
  const DisplacementRange range = valid_displacement_range(geom, opening_limit_deg);

  ValidationReport report;
  report.source = source;
  double sum = 0.0;
  for (const ReferenceConfig& ref : references) {
    if (!std::isfinite(ref.slider_mm) || !std::isfinite(ref.total_angle_deg) ||
        !range.contains(ref.slider_mm)) {
      report.excluded.push_back(ref);
      continue;
    }
    ComparisonPair p;
    p.slider_mm = ref.slider_mm;
    p.reference_deg = ref.total_angle_deg;
    p.model_deg = jaw_state(geom, ref.slider_mm).total_angle_deg;
    p.abs_error_deg = std::abs(p.reference_deg - p.model_deg);
    sum += p.abs_error_deg;
    report.max_error_deg = std::max(report.max_error_deg, p.abs_error_deg);
    report.pairs.push_back(p);
  }
  if (report.pairs.empty()) throw DomainError("every reference lies outside the model range");
  report.mae_deg = sum / static_cast<double>(report.pairs.size());
  report.curve = model_curve(geom, range.min_mm, range.max_mm, curve_points);
  return report;
}

MarkerPose MarkerPose::standard() {
  MarkerPose p;
  p.rotation = (Eigen::AngleAxisd(deg_to_rad(30.0), Vector3d::UnitZ()) *
                Eigen::AngleAxisd(deg_to_rad(20.0), Vector3d::UnitY()) *
                Eigen::AngleAxisd(deg_to_rad(10.0), Vector3d::UnitX()))
                   .toRotationMatrix();
  p.translation = Vector3d(100.0, -50.0, 250.0);
  return p;
}

MarkerFrame synthesize_frame(const GripperGeometry& geom, double slider_mm,
                             const MarkerSynthesis& synth, double timestamp_s) {
  const GripperState st = jaw_state(geom, slider_mm);
  const double half = deg_to_rad(st.total_angle_deg) / 2.0;
  const double lj = geom.jaw_length();
  const double ps = geom.pivot_slider() - slider_mm;

  MarkerFrame local;
  local.timestamp_s = timestamp_s;
  local[MarkerLabel::JawLeftTip] = Vector3d(lj * std::cos(half), lj * std::sin(half), 0.0);
  local[MarkerLabel::JawRightTip] = Vector3d(lj * std::cos(half), -lj * std::sin(half), 0.0);
  local[MarkerLabel::Pivot] = Vector3d::Zero();
  local[MarkerLabel::Flange] = Vector3d(-(ps + synth.flange_offset_mm), 0.0, 0.0);

  MarkerFrame out = local;
  for (std::size_t i = 0; i < kMarkerCount; ++i) {
    out.points[i] = synth.pose.rotation * local.points[i] + synth.pose.translation;
  }
  return out;
}

double marker_recovery_mae(const GripperGeometry& geom, const std::vector<double>& sliders,
                           double sigma_mm, int seeds, std::uint64_t base_seed,
                           const MarkerSynthesis& synth) {
  if (sliders.empty() || seeds <= 0) throw DomainError("recovery study needs samples");
  double sum = 0.0;
  std::size_t count = 0;
  for (int k = 0; k < seeds; ++k) {
    std::mt19937_64 rng(base_seed + static_cast<std::uint64_t>(k));
    for (double slider : sliders) {
      const MarkerFrame noisy = add_marker_noise(synthesize_frame(geom, slider, synth), sigma_mm, rng);
      const double recovered = jaw_angle_from_markers(project_to_gripper_plane(noisy));
      sum += std::abs(recovered - jaw_state(geom, slider).total_angle_deg);
      ++count;
    }
  }
  return sum / static_cast<double>(count);
}

std::vector<ReferenceConfig> synthetic_references(const GripperGeometry& geom,
                                                  const std::vector<double>& sliders,
                                                  const std::vector<double>& offsets_deg) {
  std::vector<ReferenceConfig> refs;
  refs.reserve(sliders.size());
  for (std::size_t i = 0; i < sliders.size(); ++i) {
    const double offset = offsets_deg.empty() ? 0.0 : offsets_deg[i % offsets_deg.size()];
    refs.push_back({sliders[i], jaw_state(geom, sliders[i]).total_angle_deg + offset});
  }
  return refs;
}

std::vector<ReferenceConfig> read_references(const std::filesystem::path& path) {
  std::vector<ReferenceConfig> refs;
  read_table(path, kRefHeader, kRefUnits, 2, [&](const auto& f, std::size_t line) {
    refs.push_back({csv::parse_number<double>(f[0], line, "slider"),
                    csv::parse_number<double>(f[1], line, "totalAngle")});
  });
  return refs;
}

void write_references(const std::filesystem::path& path, const std::vector<ReferenceConfig>& refs) {
  std::ofstream out = open_out(path);
  out << kRefHeader << '\n' << kRefUnits << '\n';
  for (const auto& r : refs) out << fmt::format("{},{}\n", r.slider_mm, r.total_angle_deg);
}

std::vector<MarkerFrame> read_marker_frames(const std::filesystem::path& path) {
  std::vector<MarkerFrame> frames;
  read_table(path, kMarkerHeader, kMarkerUnits, 13, [&](const auto& f, std::size_t line) {
    MarkerFrame frame;
    frame.timestamp_s = csv::parse_number<double>(f[0], line, "timestamp");
    for (std::size_t m = 0; m < kMarkerCount; ++m) {
      for (int k = 0; k < 3; ++k) {
        const double v = csv::parse_number<double>(f[1 + 3 * m + k], line, "coordinate");
        if (!std::isfinite(v)) throw ParseError(line, "non-finite marker coordinate");
        frame.points[m][k] = v;
      }
    }
    frames.push_back(frame);
  });
  return frames;
}

void write_marker_frames(const std::filesystem::path& path, const std::vector<MarkerFrame>& frames) {
  std::ofstream out = open_out(path);
  out << kMarkerHeader << '\n' << kMarkerUnits << '\n';
  for (const auto& fr : frames) {
    out << fmt::format("{}", fr.timestamp_s);
    for (const auto& p : fr.points) out << fmt::format(",{},{},{}", p.x(), p.y(), p.z());
    out << '\n';
  }
}

void write_report(const std::filesystem::path& path, const ValidationReport& report) {
  std::ofstream out = open_out(path);
  out << "slider,reference,model,absError,status\nmm,deg,deg,deg,-\n";
  for (const auto& p : report.pairs) {
    out << fmt::format("{},{},{},{},ok\n", p.slider_mm, p.reference_deg, p.model_deg, p.abs_error_deg);
  }
  for (const auto& r : report.excluded) {
    out << fmt::format("{},{},,,excluded\n", r.slider_mm, r.total_angle_deg);
  }
}

void write_curve(const std::filesystem::path& path, const std::vector<CurvePoint>& curve) {
  std::ofstream out = open_out(path);
  out << kRefHeader << '\n' << kRefUnits << '\n';
  for (const auto& c : curve) out << fmt::format("{},{}\n", c.slider_mm, c.total_angle_deg);
}

}  // namespace flexinst
