#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include "flexinst/errors.hpp"
#include "flexinst/validation.hpp"

using namespace flexinst;
using doctest::Approx;
using Eigen::Vector3d;
namespace fs = std::filesystem;

namespace {

const GripperGeometry kGeom = GripperGeometry::nominal();

MarkerFrame frame(Vector3d left, Vector3d right, Vector3d pivot, Vector3d flange) {
  MarkerFrame f;
  f[MarkerLabel::JawLeftTip] = left;
  f[MarkerLabel::JawRightTip] = right;
  f[MarkerLabel::Pivot] = pivot;
  f[MarkerLabel::Flange] = flange;
  return f;
}

std::vector<double> grid(double lo, double hi, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(lo + (hi - lo) * i / (n - 1));
  return v;
}

}  // namespace

TEST_CASE("jaw angle from markers") {
  const double s = std::sqrt(0.5);
  CHECK(jaw_angle_from_markers(frame({s, s, 0}, {s, -s, 0}, {0, 0, 0}, {-10, 0, 0})) == Approx(90.0));
  CHECK(jaw_angle_from_markers(frame({1, 0, 0}, {3, 0, 0}, {0, 0, 0}, {-10, 0, 0})) == 0.0);
  CHECK(jaw_angle_from_markers(frame({1, 0, 0}, {-2, 0, 0}, {0, 0, 0}, {-10, 0, 0})) == Approx(180.0));
  CHECK_THROWS_AS(jaw_angle_from_markers(frame({0, 0, 0}, {1, 0, 0}, {0, 0, 0}, {-1, 0, 0})), DomainError);
  CHECK_THROWS_AS(jaw_angle_from_markers(frame({1, 0, 0}, {5, 5, 5}, {5, 5, 5}, {-1, 0, 0})), DomainError);
  CHECK(jaw_angle_from_markers(synthesize_frame(kGeom, 2.0)) == Approx(37.9121330958).epsilon(1e-10));
}

TEST_CASE("displacement from markers") {
  const MarkerFrame base = frame({20, 5, 0}, {20, -5, 0}, {0, 0, 0}, {-20, 0, 0});
  CHECK(displacement_from_markers(base, base) == 0.0);
  MarkerFrame f = base;
  f[MarkerLabel::Flange] = {-18, 0, 0};
  CHECK(displacement_from_markers(f, base) == Approx(2.0));
  f[MarkerLabel::Flange] = {-18, 1, 0};
  CHECK(displacement_from_markers(f, base) == Approx(2.0));
  f[MarkerLabel::Flange] = {-22, 0, -1};
  CHECK(displacement_from_markers(f, base) == Approx(-2.0));
  MarkerFrame degenerate = base;
  degenerate[MarkerLabel::Flange] = degenerate[MarkerLabel::Pivot];
  CHECK_THROWS_AS(displacement_from_markers(base, degenerate), DomainError);

  for (double s : {0.5, 2.0, 4.5}) {
    CHECK(displacement_from_markers(synthesize_frame(kGeom, s), synthesize_frame(kGeom, 0.0)) ==
          Approx(s).epsilon(1e-12));
  }
}

TEST_CASE("projection removes only the out-of-plane component") {
  const MarkerFrame clean = frame({20, 5, 0}, {20, -5, 0}, {0, 0, 0}, {-20, 0, 0});
  const MarkerFrame same = project_to_gripper_plane(clean);
  for (std::size_t i = 0; i < kMarkerCount; ++i) CHECK((same.points[i] - clean.points[i]).norm() < 1e-12);

  MarkerFrame bumped = clean;
  bumped[MarkerLabel::JawLeftTip].z() = 0.7;
  bumped[MarkerLabel::JawRightTip].z() = 0.7;
  const MarkerFrame p = project_to_gripper_plane(bumped);
  // A common lift of both tips is normal to the plane and disappears.
  CHECK(jaw_angle_from_markers(p) == Approx(jaw_angle_from_markers(clean)));

  MarkerFrame skew = clean;
  skew[MarkerLabel::JawLeftTip].z() = 1.0;
  const MarkerFrame q = project_to_gripper_plane(skew);
  const Vector3d n = (q[MarkerLabel::Flange] - q[MarkerLabel::Pivot])
                         .cross(skew[MarkerLabel::JawLeftTip] - skew[MarkerLabel::JawRightTip])
                         .normalized();
  CHECK(std::abs((q[MarkerLabel::JawLeftTip] - q[MarkerLabel::Pivot]).dot(n)) < 1e-12);
  CHECK(std::abs((q[MarkerLabel::JawRightTip] - q[MarkerLabel::Pivot]).dot(n)) < 1e-12);

  const MarkerFrame closed = frame({20, 0, 0}, {20, 0, 0}, {0, 0, 0}, {-20, 0, 0});
  CHECK(project_to_gripper_plane(closed)[MarkerLabel::JawLeftTip] == closed[MarkerLabel::JawLeftTip]);
}

TEST_CASE("noiseless marker pipeline inverts the forward model") {
  const DisplacementRange r = valid_displacement_range(kGeom);
  for (int i = 0; i <= 1000; ++i) {
    const double s = r.min_mm + (r.max_mm - r.min_mm) * i / 1000.0;
    const double model = jaw_state(kGeom, s).total_angle_deg;
    const double recovered = jaw_angle_from_markers(project_to_gripper_plane(synthesize_frame(kGeom, s)));
    // Markers carry no handedness, so the slightly negative closed angle comes back unsigned.
    REQUIRE(std::abs(recovered - std::abs(model)) < 1e-6);
  }
  CHECK(marker_recovery_mae(kGeom, grid(0.5, 5.5, 11), 0.0, 20) < 1e-6);
}

TEST_CASE("recovery error grows with marker noise") {
  const auto sliders = grid(0.5, 5.5, 11);
  double prev = -1.0;
  for (double sigma : {0.0, 0.05, 0.1, 0.2, 0.4}) {
    const double mae = marker_recovery_mae(kGeom, sliders, sigma, 20);
    CHECK(mae > prev);
    prev = mae;
  }
  CHECK_THROWS_AS(marker_recovery_mae(kGeom, {}, 0.1, 20), DomainError);
  CHECK_THROWS_AS(marker_recovery_mae(kGeom, sliders, 0.1, 0), DomainError);
}

TEST_CASE("noise draws follow label and axis order") {
  std::mt19937_64 a(42), b(42);
  const MarkerFrame clean = synthesize_frame(kGeom, 1.0);
  const MarkerFrame noisy = add_marker_noise(clean, 0.5, a);
  std::normal_distribution<double> n(0.0, 0.5);
  for (std::size_t m = 0; m < kMarkerCount; ++m) {
    for (int k = 0; k < 3; ++k) CHECK(noisy.points[m][k] == clean.points[m][k] + n(b));
  }
  std::mt19937_64 c(42);
  CHECK(add_marker_noise(clean, 0.0, c).points == clean.points);
}

TEST_CASE("validate") {
  const auto sliders = grid(0.0, 5.8, 9);
  SUBCASE("model-generated references") {
    const ValidationReport r = validate(synthetic_references(kGeom, sliders), kGeom, ReferenceSource::Cad);
    CHECK(r.pairs.size() == 9);
    CHECK(r.mae_deg <= 1e-9);
    CHECK(r.curve.size() == 101);
    CHECK(r.curve.front().slider_mm == 0.0);
    CHECK(r.curve.back().total_angle_deg == Approx(90.0).epsilon(1e-9));
  }
  SUBCASE("constant offset") {
    const ValidationReport r = validate(synthetic_references(kGeom, sliders, {0.5}), kGeom, ReferenceSource::Cad);
    CHECK(r.mae_deg == Approx(0.5).epsilon(1e-12));
    CHECK(r.max_error_deg == Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("mixed offsets") {
    const ValidationReport r =
        validate(synthetic_references(kGeom, {1.0, 2.0, 3.0}, {1.0, -2.0, 3.0}), kGeom, ReferenceSource::Mocap);
    CHECK(r.mae_deg == Approx(2.0).epsilon(1e-12));
    CHECK(r.max_error_deg == Approx(3.0).epsilon(1e-12));
    CHECK(r.max_error_deg >= r.mae_deg);
  }
  SUBCASE("out-of-range references are excluded and counted") {
    auto refs = synthetic_references(kGeom, {1.0, 2.0});
    refs.push_back({7.0, 100.0});
    refs.push_back({-0.5, 0.0});
    refs.push_back({2.5, std::nan("")});
    const ValidationReport r = validate(refs, kGeom, ReferenceSource::Cad);
    CHECK(r.pairs.size() == 2);
    CHECK(r.excluded.size() == 3);
    CHECK(r.mae_deg <= 1e-9);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(validate({}, kGeom, ReferenceSource::Cad), DomainError);
    CHECK_THROWS_AS(validate({{9.0, 1.0}}, kGeom, ReferenceSource::Cad), DomainError);
  }
  SUBCASE("mae equals an independent brute-force sum") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> off(-3.0, 3.0);
    std::vector<double> offsets(200);
    for (double& o : offsets) o = off(rng);
    const auto many = grid(0.0, 5.8, 200);
    const ValidationReport r = validate(synthetic_references(kGeom, many, offsets), kGeom, ReferenceSource::Cad);
    std::vector<double> errs;
    for (const auto& p : r.pairs) errs.push_back(std::abs(p.reference_deg - p.model_deg));
    std::sort(errs.begin(), errs.end());
    long double sum = 0;
    for (auto it = errs.rbegin(); it != errs.rend(); ++it) sum += *it;
    CHECK(std::abs(static_cast<double>(sum / errs.size()) - r.mae_deg) < 1e-12);
  }
}

TEST_CASE("mocap references from marker frames") {
  std::vector<MarkerFrame> frames;
  for (double s : {0.0, 1.0, 2.0, 3.0}) frames.push_back(synthesize_frame(kGeom, s));
  const auto refs = references_from_markers(frames);
  REQUIRE(refs.size() == 4);
  for (std::size_t i = 0; i < refs.size(); ++i) CHECK(refs[i].slider_mm == Approx(static_cast<double>(i)).epsilon(1e-12));
  const ValidationReport r = validate(std::vector(refs.begin() + 1, refs.end()), kGeom, ReferenceSource::Mocap);
  CHECK(r.mae_deg < 1e-9);
  CHECK_THROWS_AS(references_from_markers({}), DomainError);
}

TEST_CASE("reference and marker files") {
  const fs::path dir = fs::temp_directory_path();
  const fs::path refs_path = dir / "flexinst_refs.csv";
  const auto refs = synthetic_references(kGeom, grid(0.0, 5.0, 7), {0.1, -0.2});
  write_references(refs_path, refs);
  const auto back = read_references(refs_path);
  REQUIRE(back.size() == refs.size());
  for (std::size_t i = 0; i < refs.size(); ++i) {
    CHECK(back[i].slider_mm == refs[i].slider_mm);
    CHECK(back[i].total_angle_deg == refs[i].total_angle_deg);
  }

  const fs::path markers_path = dir / "flexinst_markers.csv";
  std::mt19937_64 rng(1);
  std::vector<MarkerFrame> frames;
  for (double s : {0.0, 1.0, 2.5}) frames.push_back(add_marker_noise(synthesize_frame(kGeom, s, {}, s), 0.1, rng));
  write_marker_frames(markers_path, frames);
  const auto fb = read_marker_frames(markers_path);
  REQUIRE(fb.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(fb[i].timestamp_s == frames[i].timestamp_s);
    CHECK(fb[i].points == frames[i].points);
  }

  std::ofstream(markers_path) << "timestamp,jl_x\ns,mm\n";
  CHECK_THROWS_AS(read_marker_frames(markers_path), ParseError);
  std::ofstream(refs_path) << "slider,totalAngle\nmm,deg\n1.0,2.0\n1.0\n";
  try {
    read_references(refs_path);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
  std::ofstream(refs_path) << "slider,totalAngle\nmm,deg\n1.0,abc\n";
  CHECK_THROWS_AS(read_references(refs_path), ParseError);

  const fs::path report_path = dir / "flexinst_report.csv";
  auto with_bad = refs;
  with_bad.push_back({8.0, 1.0});
  write_report(report_path, validate(with_bad, kGeom, ReferenceSource::Cad));
  std::ifstream rep(report_path);
  std::string line;
  int rows = 0, excluded = 0;
  while (std::getline(rep, line)) {
    ++rows;
    if (line.find("excluded") != std::string::npos) ++excluded;
  }
  CHECK(rows == 2 + 8);
  CHECK(excluded == 1);
  for (const auto& p : {refs_path, markers_path, report_path}) fs::remove(p);
}
