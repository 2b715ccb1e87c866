// Acceptance suite: one PASS/FAIL line per primary criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "flexinst/control_fsm.hpp"
#include "flexinst/gripper_model.hpp"
#include "flexinst/input_pipeline.hpp"
#include "flexinst/teleop_loop.hpp"
#include "flexinst/telemetry.hpp"
#include "flexinst/validation.hpp"
#include "kinematic_oracle.hpp"

using namespace flexinst;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

/// Collects failed checks; the first few are reported.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (failures_.size() < 5) failures_.push_back(what);
    ++failed_;
  }
  Outcome result(std::string summary) const {
    if (failed_ == 0) return {true, std::move(summary)};
    std::string d = fmt::format("{} failed check(s): ", failed_);
    for (const auto& f : failures_) d += f + "; ";
    return {false, d};
  }

 private:
  std::vector<std::string> failures_;
  int failed_ = 0;
};

const GripperGeometry kGeom = GripperGeometry::nominal();

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome jaw_offset_criterion() {
  const double theta_o = jaw_offset_angle(6.5, 2.5);
  Checks c;
  c.expect(std::abs(theta_o - 22.6) <= 0.05, fmt::format("theta_o = {}", theta_o));
  return c.result(fmt::format("theta_o = {:.5f} deg", theta_o));
}

Outcome closed_at_rest() {
  const double total = jaw_state(kGeom, 0.0).total_angle_deg;
  const double ref = oracle::evaluate(0.0).total_deg;
  Checks c;
  c.expect(std::abs(total) < 0.1, fmt::format("theta_total(0) = {}", total));
  c.expect(std::abs(total - ref) < 1e-12, fmt::format("oracle disagrees: {}", ref));
  return c.result(fmt::format("theta_total(0) = {:.6f} deg", total));
}

struct SweepRow {
  double slider, total, alpha_a, alpha_b, width;
};

std::vector<SweepRow> load_sweep() {
  std::ifstream in(fs::path(FLEXINST_ORACLE_DIR) / "kinematic_sweep.csv");
  if (!in) throw std::runtime_error("kinematic_sweep.csv not found");
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    SweepRow r{};
    ss >> r.slider >> r.total >> r.alpha_a >> r.alpha_b >> r.width;
    rows.push_back(r);
  }
  return rows;
}

Outcome kinematic_oracle_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = load_sweep();
  Checks c;
  c.expect(rows.size() == 1000, fmt::format("{} sweep rows", rows.size()));
  c.expect(rows.back().slider == 5.84, "sweep does not end at 5.84 mm");
  double worst = 0.0, worst_cg = 0.0, worst_inv = 0.0;
  for (const auto& r : rows) {
    const GripperState s = jaw_state(kGeom, r.slider);
    const oracle::Kinematics o = oracle::evaluate(r.slider);
    for (auto [mine, ref, cg] : {std::tuple{s.total_angle_deg, r.total, o.total_deg},
                                 std::tuple{s.alpha_a_deg, r.alpha_a, o.alpha_a_deg},
                                 std::tuple{s.alpha_b_deg, r.alpha_b, o.alpha_b_deg},
                                 std::tuple{s.tip_width_mm, r.width, o.width_mm}}) {
      worst = std::max(worst, std::abs(mine - ref));
      worst_cg = std::max(worst_cg, std::abs(mine - cg));
    }
    const double back = displacement_from_total_angle(kGeom, s.total_angle_deg);
    worst_inv = std::max(worst_inv, std::abs(back - r.slider));
  }
  const double elapsed = seconds_since(t0);
  c.expect(worst <= 1e-9, fmt::format("max deviation from the frozen oracle {:.3e}", worst));
  c.expect(worst_cg <= 1e-9, fmt::format("max deviation from coordinate geometry {:.3e}", worst_cg));
  c.expect(worst_inv < 1e-6, fmt::format("inverse round trip {:.3e} mm", worst_inv));
  c.expect(elapsed < 1.0, fmt::format("took {:.3f} s", elapsed));
  return c.result(fmt::format("1000 points, max dev {:.2e}, inverse {:.2e} mm, {:.3f} s", worst,
                              worst_inv, elapsed));
}

Outcome force_model() {
  Checks c;
  const ForceState f = force_transmission(kGeom, 2.0, 1.0);
  const double ratio = f.tip_n / f.input_n;
  c.expect(std::abs(ratio - 0.118) <= 0.001, fmt::format("F_T/F_IN = {}", ratio));
  c.expect(std::abs(ratio - oracle::evaluate(2.0).tip_ratio) < 1e-12, "oracle ratio disagrees");
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> force(0.0, 50.0), slider(0.0, 5.8);
  for (int i = 0; i < 1000; ++i) {
    const double fin = force(rng);
    const ForceState s = force_transmission(kGeom, slider(rng), fin);
    c.expect(s.half_input_n == fin / 2.0, "F_S != F_IN/2");
    c.expect(s.total_grip_n == 2.0 * s.tip_n, "F_total != 2 F_T");
  }
  return c.result(fmt::format("F_T/F_IN(2 mm) = {:.6f}; F_S, F_total exact over 1000 samples", ratio));
}

Outcome mae_substitute() {
  Checks c;
  std::vector<double> nine;
  for (int i = 0; i < 9; ++i) nine.push_back(5.8 * i / 8.0);

  const double mae_a = validate(synthetic_references(kGeom, nine), kGeom, ReferenceSource::Cad).mae_deg;
  c.expect(mae_a <= 1e-9, fmt::format("(a) MAE {}", mae_a));

  const double mae_b1 = validate(synthetic_references(kGeom, nine, {0.5}), kGeom, ReferenceSource::Cad).mae_deg;
  const double mae_b2 =
      validate(synthetic_references(kGeom, {1.0, 2.0, 3.0}, {1.0, -2.0, 3.0}), kGeom, ReferenceSource::Mocap).mae_deg;
  c.expect(std::abs(mae_b1 - 0.5) < 1e-12, fmt::format("(b) +0.5 offsets gave {}", mae_b1));
  c.expect(std::abs(mae_b2 - 2.0) < 1e-12, fmt::format("(b) {{+1,-2,+3}} gave {}", mae_b2));

  // Pre-registered by tests/oracle/noise_band.py (central 99.9 % of 20000 replicates).
  constexpr double kBandLo = 0.578, kBandHi = 0.805;
  std::vector<double> sliders;
  for (int i = 0; i <= 10; ++i) sliders.push_back(0.5 + 0.5 * i);
  const double mae_c = marker_recovery_mae(kGeom, sliders, 0.2, 20);
  c.expect(mae_c >= kBandLo && mae_c <= kBandHi, fmt::format("(c) sigma 0.2 MAE {} outside band", mae_c));

  double prev = -1.0;
  std::string ladder;
  for (double sigma : {0.4, 0.2, 0.1, 0.05, 0.01, 0.0}) {
    const double m = marker_recovery_mae(kGeom, sliders, sigma, 20);
    if (prev >= 0.0) c.expect(m < prev, fmt::format("(c) MAE not decreasing at sigma {}", sigma));
    prev = m;
    ladder += fmt::format(" {}:{:.4f}", sigma, m);
  }
  c.expect(prev <= 1e-6, fmt::format("(c) sigma 0 MAE {}", prev));
  return c.result(fmt::format("(a) {:.1e}  (b) {:.12f}, {:.12f}  (c) {:.4f} in [{}, {}]; sigma->MAE{}",
                              mae_a, mae_b1, mae_b2, mae_c, kBandLo, kBandHi, ladder));
}

class ManualInput final : public InputSource {
 public:
  bool open() override { return true; }
  TickInput poll() override {
    TickInput t = next;
    next.events = 0;
    return t;
  }
  TickInput next;
};

bool motors_stopped(TeleopLoop& loop) {
  for (std::size_t i = 0; i < kMotorCount; ++i) {
    if (loop.plant().bus().motor(static_cast<MotorRole>(i)).target() != 0.0) return false;
  }
  return true;
}

bool zero_output(const TelemetryRecord& r) {
  return r.command.is_zero() && std::all_of(r.motor_speeds.begin(), r.motor_speeds.end(),
                                            [](int v) { return v == 0; });
}

Outcome fsm_safety() {
  const auto t0 = std::chrono::steady_clock::now();
  Checks c;
  int transitions = 0;
  for (Mode from : kAllModes) {
    for (EventKind ev : kAllEvents) {
      Mode want = from;
      if (ev == EventKind::FaultRaised) want = Mode::Fault;
      else if (from == Mode::Init && ev == EventKind::InitOk) want = Mode::Idle;
      else if (from == Mode::Init && ev == EventKind::InitFail) want = Mode::Fault;
      else if (from == Mode::Idle && ev == EventKind::EnablePressed) want = Mode::Teleop;
      else if (from == Mode::Teleop && ev == EventKind::DisablePressed) want = Mode::Idle;
      else if (from == Mode::Fault && ev == EventKind::ResetSequence) want = Mode::Init;
      c.expect(next_mode(from, ev) == want, fmt::format("{} + {}", to_string(from), to_string(ev)));
      ++transitions;
    }
  }

  // Every fault source raised mid-TELEOP: FAULT and zero output on that very tick.
  const std::uint32_t sources[] = {event_bits::kInjectBusTimeout, event_bits::kInjectEncoderGlitch,
                                   event_bits::kInjectDriverAbsent, event_bits::kInputLost};
  for (std::uint32_t src : sources) {
    ManualInput in;
    TeleopLoop loop(SystemConfig{}, in);
    loop.initialize();
    in.next.events = event_bits::kEnable;
    loop.tick();
    in.next.raw[Axis::Tz] = 350;
    for (int i = 0; i < 30; ++i) loop.tick();
    c.expect(!motors_stopped(loop), "motors idle before the fault");
    in.next.events = src;
    const TelemetryRecord r = loop.tick();
    c.expect(r.mode == Mode::Fault, fmt::format("event {} did not fault on the same tick", src));
    c.expect(zero_output(r) && motors_stopped(loop), fmt::format("event {} left output", src));
    if (src == event_bits::kInjectBusTimeout) c.expect(r.fault == FaultCause::BusTimeout, "wrong cause");
  }

  // Random stimulus: no motor output outside TELEOP.
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> counts(-400, 400), coin(0, 40), buttons(0, 3);
  int non_teleop = 0;
  for (int run = 0; run < 4; ++run) {
    ManualInput in;
    TeleopLoop loop(SystemConfig{}, in);
    loop.initialize();
    for (int i = 0; i < 5000; ++i) {
      for (int& v : in.next.raw.counts) v = counts(rng);
      in.next.raw.buttons = coin(rng) < 2 ? static_cast<std::uint32_t>(buttons(rng)) : 0;
      const int e = coin(rng);
      in.next.events = e <= 8 ? (1u << e) : 0;
      const TelemetryRecord r = loop.tick();
      if (r.mode != Mode::Teleop) {
        ++non_teleop;
        c.expect(zero_output(r) && motors_stopped(loop), fmt::format("output in {}", to_string(r.mode)));
      }
    }
  }
  const double elapsed = seconds_since(t0);
  c.expect(elapsed < 1.0, fmt::format("took {:.3f} s", elapsed));
  return c.result(fmt::format("{} transitions, 4 fault sources, {} non-TELEOP ticks silent, {:.3f} s",
                              transitions, non_teleop, elapsed));
}

Outcome pipeline_properties() {
  Checks c;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unit(-1.0, 1.0), scale(0.05, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double a = unit(rng), b = unit(rng);
    const double lo = std::min(a, b), hi = std::max(a, b);
    c.expect(dead_zone(lo, 0.05) <= dead_zone(hi, 0.05), "dead zone not monotone");
    c.expect(std::abs(dead_zone(a, 0.05) - dead_zone(b, 0.05)) <= std::abs(a - b) / 0.95 + 1e-15,
             "dead zone jumps");
  }
  c.expect(dead_zone(0.05, 0.05) == 0.0 && dead_zone(0.05 + 1e-12, 0.05) < 1e-11, "dead zone edge");

  int worst_ticks = 0;
  for (double beta : {0.1, 0.2, 0.3, 0.5}) {
    PipelineConfig cfg;
    cfg.filter_coeff = beta;
    cfg.priority = PriorityMode::AllAxes;
    InputPipeline p(cfg);
    const int n = static_cast<int>(std::ceil(std::log(0.01) / std::log(1.0 - beta)));
    RawAxes step;
    step[Axis::Rz] = 350;
    double y = 0.0;
    for (int k = 0; k < n; ++k) y = p.process(step).filtered[Axis::Rz];
    c.expect(1.0 - y <= 0.01, fmt::format("beta {} not within 1% after {} ticks", beta, n));
    if (beta == 0.2) worst_ticks = n;
  }

  InputPipeline dom(PipelineConfig{});
  std::uniform_int_distribution<int> counts(-350, 350);
  for (int i = 0; i < 10000; ++i) {
    RawAxes raw;
    for (int& v : raw.counts) v = counts(rng);
    c.expect(dom.process(raw).command.nonzero_count() <= 1, "more than one command");
  }
  auto argmax = [](const JointVelocityCommand& cmd) {
    return cmd.q1_deg_s != 0 ? 1 : cmd.q3_mm_s != 0 ? 3 : cmd.q2_deg_s != 0 ? 2 : cmd.q4_deg_s != 0 ? 4 : 0;
  };
  const PipelineConfig pc;
  for (int i = 0; i < 10000; ++i) {
    NormalizedAxes n;
    for (double& v : n.values) v = unit(rng);
    const double k = scale(rng);
    NormalizedAxes m = n;
    for (double& v : m.values) v *= k;
    c.expect(argmax(map_axes(n, pc)) == argmax(map_axes(m, pc)), "argmax changed under scaling");
  }
  return c.result(fmt::format("1e4 dead-zone samples, 1% in {} ticks at beta 0.2, 1e4 priority samples", worst_ticks));
}

Outcome end_to_end_determinism() {
  Checks c;
  const fs::path dir = fs::temp_directory_path();
  const fs::path first = dir / "flexinst_acceptance_trace.csv";
  const fs::path second = dir / "flexinst_acceptance_replay.csv";

  PlantTruth truth;
  const auto recorded = run_session(SystemConfig{}, demo_session(), &truth);
  record_trace(first, recorded);

  double max_jaw = 0.0, max_q1 = 0.0, min_jaw_after_open = 1e9;
  bool opened = false;
  for (const auto& r : recorded) {
    max_jaw = std::max(max_jaw, r.theta_total_deg);
    max_q1 = std::max(max_q1, r.q1_deg);
    if (r.theta_total_deg > 89.0) opened = true;
    if (opened) min_jaw_after_open = std::min(min_jaw_after_open, r.theta_total_deg);
  }
  c.expect(recorded.size() == 3000, "trace is not 30 s at 100 Hz");
  c.expect(max_jaw > 89.9 && min_jaw_after_open < 0.1, "no full open-close cycle");
  c.expect(max_q1 > 89.5, fmt::format("bend only reached {}", max_q1));

  const auto loaded = replay_trace(first);
  std::vector<TickInput> inputs;
  for (const auto& r : loaded) inputs.push_back(r.input());
  PlantTruth replay_truth;
  const auto replayed = run_session(SystemConfig{}, inputs, &replay_truth);
  record_trace(second, replayed);

  c.expect(loaded == recorded, "trace did not load losslessly");
  c.expect(replayed == recorded, "replayed telemetry differs");
  std::ifstream a(first, std::ios::binary), b(second, std::ios::binary);
  const std::string sa((std::istreambuf_iterator<char>(a)), {}), sb((std::istreambuf_iterator<char>(b)), {});
  c.expect(sa == sb, "telemetry files differ");

  const double dq3 = std::abs(replay_truth.state.q3_mm - replayed.back().q3_mm);
  c.expect(dq3 <= 0.002, fmt::format("final |true - estimated q3| = {} mm", dq3));
  fs::remove(first);
  fs::remove(second);
  return c.result(fmt::format("3000 ticks bit-identical ({} bytes); jaw max {:.3f} deg, bend max {:.3f} deg; "
                              "final q3 true {:.5f} vs est {:.5f} mm",
                              sa.size(), max_jaw, max_q1, replay_truth.state.q3_mm, replayed.back().q3_mm));
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"Jaw offset angle", jaw_offset_criterion},
      {"Closed at rest", closed_at_rest},
      {"Kinematic oracle suite", kinematic_oracle_suite},
      {"Force model spot values", force_model},
      {"MAE methodology substitute", mae_substitute},
      {"FSM safety properties", fsm_safety},
      {"Pipeline properties", pipeline_properties},
      {"End-to-end determinism", end_to_end_determinism},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    fmt::print("{} {}: {}\n", o.pass ? "PASS" : "FAIL", name, o.detail);
  }
  fmt::print("{}/{} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
