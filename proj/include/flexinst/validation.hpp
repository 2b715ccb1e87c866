#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "flexinst/gripper_model.hpp"

// Model-vs-measurement comparison: jaw angles from reference tables (CAD)
// or from 3D marker captures, scored by mean absolute error.

namespace flexinst {

struct ReferenceConfig {
  double slider_mm = 0.0;
  double total_angle_deg = 0.0;
};

enum class MarkerLabel : std::uint8_t { JawLeftTip = 0, JawRightTip, Pivot, Flange };
inline constexpr std::size_t kMarkerCount = 4;

struct MarkerFrame {
  double timestamp_s = 0.0;
  std::array<Eigen::Vector3d, kMarkerCount> points{
      Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(),
      Eigen::Vector3d::Zero()};

  const Eigen::Vector3d& operator[](MarkerLabel l) const { return points[static_cast<std::size_t>(l)]; }
  Eigen::Vector3d& operator[](MarkerLabel l) { return points[static_cast<std::size_t>(l)]; }
};

/// Angle between (left tip - pivot) and (right tip - pivot), degrees.
double jaw_angle_from_markers(const MarkerFrame& frame);

/// Flange travel relative to `baseline`, projected on the baseline's
/// pivot-to-flange axis. Positive when the flange moves toward the pivot,
/// i.e. when the jaws open.
double displacement_from_markers(const MarkerFrame& frame, const MarkerFrame& baseline);

/// Removes the out-of-plane component of both jaw tips. The gripper plane
/// contains the instrument axis (pivot→flange) and the tip-to-tip chord.
/// Frames whose plane is undefined are returned unchanged.
MarkerFrame project_to_gripper_plane(const MarkerFrame& frame);

/// Mocap pipeline: first frame is the closed-jaw baseline; every frame
/// becomes (displacement, jaw angle) after in-plane projection.
std::vector<ReferenceConfig> references_from_markers(const std::vector<MarkerFrame>& frames);

enum class ReferenceSource : std::uint8_t { Cad, Mocap };
std::string_view to_string(ReferenceSource s) noexcept;

struct ComparisonPair {
  double slider_mm = 0.0;
  double reference_deg = 0.0;
  double model_deg = 0.0;
  double abs_error_deg = 0.0;
};

struct CurvePoint {
  double slider_mm = 0.0;
  double total_angle_deg = 0.0;
};

struct ValidationReport {
  ReferenceSource source = ReferenceSource::Cad;
  std::vector<ComparisonPair> pairs;
  std::vector<ReferenceConfig> excluded;  ///< outside the model's displacement range
  double mae_deg = 0.0;
  double max_error_deg = 0.0;
  std::vector<CurvePoint> curve;
};

/// Throws DomainError for an empty reference list or when every reference
/// is excluded.
ValidationReport validate(const std::vector<ReferenceConfig>& references,
                          const GripperGeometry& geom, ReferenceSource source,
                          double opening_limit_deg = kDefaultOpeningLimitDeg,
                          std::size_t curve_points = 101);

/// Model total angle over an evenly spaced displacement grid (both ends included).
std::vector<CurvePoint> model_curve(const GripperGeometry& geom, double slider_min_mm,
                                    double slider_max_mm, std::size_t points);

// --- synthetic data ---------------------------------------------------------

/// Rigid placement of the gripper frame in the capture volume. In the
/// gripper frame the pivot is the origin, +x points distally along the
/// instrument axis and the jaws open in the x-y plane.
struct MarkerPose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  /// Rz(30°)·Ry(20°)·Rx(10°), translated to (100, -50, 250) mm.
  static MarkerPose standard();
};

struct MarkerSynthesis {
  MarkerPose pose = MarkerPose::standard();
  /// Flange marker sits this far proximal of the slider point S.
  double flange_offset_mm = 10.0;
};

/// Noise-free marker frame for slider displacement `slider_mm`.
MarkerFrame synthesize_frame(const GripperGeometry& geom, double slider_mm,
                             const MarkerSynthesis& synth = {}, double timestamp_s = 0.0);

/// Adds isotropic Gaussian noise (sigma in mm per coordinate) to every marker.
/// Draw order: markers in label order, x, y, z.
template <typename Rng>
MarkerFrame add_marker_noise(MarkerFrame frame, double sigma_mm, Rng& rng);

/// Recovered-angle MAE of the marker pipeline over `sliders` x `seeds`
/// noisy captures (std::mt19937_64 seeded with base_seed + k).
double marker_recovery_mae(const GripperGeometry& geom, const std::vector<double>& sliders,
                           double sigma_mm, int seeds, std::uint64_t base_seed = 1,
                           const MarkerSynthesis& synth = {});

/// Reference table sampled from the model, each angle shifted by `offsets` (cycled).
std::vector<ReferenceConfig> synthetic_references(const GripperGeometry& geom,
                                                  const std::vector<double>& sliders,
                                                  const std::vector<double>& offsets_deg = {});

// --- files ------------------------------------------------------------------

/// `slider,totalAngle` / `mm,deg`.
std::vector<ReferenceConfig> read_references(const std::filesystem::path& path);
void write_references(const std::filesystem::path& path, const std::vector<ReferenceConfig>& refs);

/// `timestamp,jl_x,jl_y,jl_z,jr_x,jr_y,jr_z,p_x,p_y,p_z,f_x,f_y,f_z` / `s,mm,...`.
std::vector<MarkerFrame> read_marker_frames(const std::filesystem::path& path);
void write_marker_frames(const std::filesystem::path& path, const std::vector<MarkerFrame>& frames);

void write_report(const std::filesystem::path& path, const ValidationReport& report);
void write_curve(const std::filesystem::path& path, const std::vector<CurvePoint>& curve);

// ---------------------------------------------------------------------------

template <typename Rng>
MarkerFrame add_marker_noise(MarkerFrame frame, double sigma_mm, Rng& rng) {
  if (sigma_mm <= 0.0) return frame;
  std::normal_distribution<double> noise(0.0, sigma_mm);
  for (auto& p : frame.points) {
    for (int k = 0; k < 3; ++k) p[k] += noise(rng);
  }
  return frame;
}

}  // namespace flexinst
