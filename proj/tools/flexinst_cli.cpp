// flexinst: command-line front end for the instrument model, the validation
// harness and the simulated teleoperation loop.

#include <atomic>
#include <cmath>
#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "flexinst/config.hpp"
#include "flexinst/console_bridge.hpp"
#include "flexinst/errors.hpp"
#include "flexinst/gripper_model.hpp"
#include "flexinst/input_source.hpp"
#include "flexinst/telemetry.hpp"
#include "flexinst/teleop_loop.hpp"
#include "flexinst/validation.hpp"

using namespace flexinst;

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

SystemConfig load_system(const std::string& path) {
  return path.empty() ? SystemConfig{} : load_config(path);
}

GripperGeometry pick_geometry(const SystemConfig& cfg, const std::string& geom_path) {
  return geom_path.empty() ? cfg.gripper : load_gripper_geometry(geom_path);
}

int cmd_sweep(const SystemConfig& cfg, const std::string& geom_path, const std::string& out_path,
              int points, double limit_deg) {
  const GripperGeometry geom = pick_geometry(cfg, geom_path);
  const DisplacementRange range = valid_displacement_range(geom, limit_deg);
  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!out_path.empty()) {
    file.open(out_path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot write " + out_path);
    out = &file;
  }
  *out << "slider,alpha,alphaA,alphaB,jawAngle,totalAngle,tipWidth,tipForceRatio\n"
       << "mm,deg,deg,deg,deg,deg,mm,-\n";
  for (int i = 0; i < points; ++i) {
    const double t = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
    const double s = range.min_mm + t * (range.max_mm - range.min_mm);
    const GripperState st = jaw_state(geom, s);
    const ForceState f = force_transmission(geom, s, 1.0);
    *out << fmt::format("{},{},{},{},{},{},{},{}\n", s, st.alpha_deg, st.alpha_a_deg, st.alpha_b_deg,
                        st.jaw_angle_deg, st.total_angle_deg, st.tip_width_mm, f.tip_n);
  }
  if (!out_path.empty()) {
    fmt::print(stderr, "wrote {} points over [{:.4f}, {:.4f}] mm to {}\n", points, range.min_mm,
               range.max_mm, out_path);
  }
  return 0;
}

int cmd_validate(const SystemConfig& cfg, const std::string& cad, const std::string& mocap,
                 const std::string& geom_path, const std::string& report_path,
                 const std::string& curve_path) {
  const GripperGeometry geom = pick_geometry(cfg, geom_path);
  const bool is_cad = !cad.empty();
  const std::vector<ReferenceConfig> refs =
      is_cad ? read_references(cad) : references_from_markers(read_marker_frames(mocap));
  const ValidationReport report =
      validate(refs, geom, is_cad ? ReferenceSource::Cad : ReferenceSource::Mocap,
               cfg.fsm.opening_limit_deg);
  if (!report_path.empty()) write_report(report_path, report);
  if (!curve_path.empty()) write_curve(curve_path, report.curve);
  fmt::print("source {}: {} points, {} excluded, MAE {:.6f} deg, max {:.6f} deg\n",
             to_string(report.source), report.pairs.size(), report.excluded.size(), report.mae_deg,
             report.max_error_deg);
  return 0;
}

std::vector<TickInput> load_inputs(const std::string& spec, double rate_hz, int raw_range) {
  if (spec == "demo") return demo_session(rate_hz, raw_range);
  if (spec.rfind("replay:", 0) == 0) {
    const std::string path = spec.substr(7);
    std::ifstream probe(path);
    std::string first;
    std::getline(probe, first);
    if (first != telemetry_header()) return read_input_trace(path);
    std::vector<TickInput> inputs;
    for (const auto& r : replay_trace(path)) inputs.push_back(r.input());
    return inputs;
  }
  throw CLI::ValidationError("--input", "expected demo, replay:<file> or console");
}

void print_summary(const std::vector<TelemetryRecord>& recs, const PlantTruth& truth) {
  if (recs.empty()) {
    fmt::print("no ticks\n");
    return;
  }
  const TelemetryRecord& last = recs.back();
  fmt::print("{} ticks, final mode {}{}\n", recs.size(), to_string(last.mode),
             last.fault == FaultCause::None ? "" : fmt::format(" ({})", to_string(last.fault)));
  fmt::print("estimated q1 {:.3f} deg  q2 {:.3f} deg  q3 {:.4f} mm  q4 {:.3f} deg  jaw {:.3f} deg\n",
             last.q1_deg, last.q2_deg, last.q3_mm, last.q4_deg, last.theta_total_deg);
  fmt::print("true      q1 {:.3f} deg  q2 {:.3f} deg  q3 {:.4f} mm  q4 {:.3f} deg\n",
             truth.state.q1_deg, truth.state.q2_deg, truth.state.q3_mm, truth.state.q4_deg);
}

int cmd_teleop(SystemConfig cfg, const std::string& input, std::optional<double> rate,
               std::optional<double> duration, const std::string& telemetry, bool debug,
               std::optional<unsigned short> port) {
  if (rate) cfg.fsm.rate_hz = *rate;
  if (debug) cfg.bridge.allow_fault_inject = true;
  if (port) cfg.bridge.port = *port;
  cfg.validate();

  std::optional<std::ofstream> tel_file;
  std::optional<TelemetryWriter> writer;
  if (!telemetry.empty()) {
    tel_file.emplace(telemetry, std::ios::binary);
    if (!*tel_file) throw std::runtime_error("cannot write " + telemetry);
    writer.emplace(*tel_file);
  }

  if (input != "console") {
    std::vector<TickInput> ticks = load_inputs(input, cfg.fsm.rate_hz, cfg.pipeline.raw_range);
    if (duration) {
      ticks.resize(static_cast<std::size_t>(std::lround(*duration * cfg.fsm.rate_hz)));
    }
    PlantTruth truth;
    const auto recs = run_session(cfg, std::move(ticks), &truth);
    if (writer) {
      for (const auto& r : recs) writer->write(r);
    }
    print_summary(recs, truth);
    return 0;
  }

  ConsoleInputSource source;
  TeleopLoop loop(cfg, source);
  loop.initialize();
  ConsoleBridge bridge(cfg.bridge, source, cfg.pipeline.raw_range, cfg.fsm.rate_hz);
  fmt::print("console bridge listening on ws://{}:{} ({} Hz loop)\n", cfg.bridge.bind_address,
             bridge.port(), cfg.fsm.rate_hz);
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::vector<TelemetryRecord> recs;
  std::optional<std::uint64_t> max_ticks;
  if (duration) max_ticks = static_cast<std::uint64_t>(std::lround(*duration * cfg.fsm.rate_hz));
  Mode last_mode = Mode::Init;
  run_realtime(loop, g_stop, [&](const TelemetryRecord& r) {
    bridge.publish(r);
    if (writer) writer->write(r);
    if (r.mode != last_mode) {
      fmt::print("tick {}: {} -> {}{}\n", r.tick, to_string(last_mode), to_string(r.mode),
                 r.fault == FaultCause::None ? "" : fmt::format(" ({})", to_string(r.fault)));
      last_mode = r.mode;
    }
    recs.push_back(r);
  }, max_ticks);
  bridge.stop();
  print_summary(recs, loop.truth());
  return 0;
}

int cmd_replay(const SystemConfig& cfg, const std::string& path) {
  const std::vector<TelemetryRecord> recorded = replay_trace(path);
  std::vector<TickInput> inputs;
  inputs.reserve(recorded.size());
  for (const auto& r : recorded) inputs.push_back(r.input());
  PlantTruth truth;
  const auto rerun = run_session(cfg, std::move(inputs), &truth);
  for (std::size_t i = 0; i < recorded.size(); ++i) {
    if (!(rerun[i] == recorded[i])) {
      fmt::print("diverged at tick {}\n  recorded: {}\n  replayed: {}\n", recorded[i].tick,
                 format_telemetry_row(recorded[i]), format_telemetry_row(rerun[i]));
      return 1;
    }
  }
  fmt::print("replay identical over {} ticks\n", recorded.size());
  print_summary(rerun, truth);
  return 0;
}

int cmd_record(const SystemConfig& cfg, const std::string& out, const std::string& input) {
  PlantTruth truth;
  const auto recs =
      run_session(cfg, load_inputs(input, cfg.fsm.rate_hz, cfg.pipeline.raw_range), &truth);
  record_trace(out, recs);
  fmt::print("recorded {} ticks to {}\n", recs.size(), out);
  print_summary(recs, truth);
  return 0;
}

int cmd_synth(const SystemConfig& cfg, const std::string& kind, const std::string& out,
              const std::string& geom_path, int count, double sigma, double offset,
              std::uint64_t seed) {
  const GripperGeometry geom = pick_geometry(cfg, geom_path);
  const DisplacementRange range = valid_displacement_range(geom, cfg.fsm.opening_limit_deg);
  std::vector<double> sliders;
  for (int i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    sliders.push_back(range.min_mm + t * (range.max_mm - range.min_mm));
  }
  if (kind == "cad") {
    write_references(out, synthetic_references(geom, sliders, {offset}));
  } else {
    std::mt19937_64 rng(seed);
    std::vector<MarkerFrame> frames;
    frames.push_back(synthesize_frame(geom, 0.0));
    for (std::size_t i = 0; i < sliders.size(); ++i) {
      const MarkerFrame clean = synthesize_frame(geom, sliders[i], {}, 0.1 * static_cast<double>(i + 1));
      frames.push_back(add_marker_noise(clean, sigma, rng));
    }
    write_marker_frames(out, frames);
  }
  fmt::print("wrote {} {} samples to {}\n", count, kind, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flexible laparoscopic instrument: model, validation and simulated teleoperation"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);

  std::string geom, out, report, curve, cad, mocap, input = "demo", telemetry, kind = "cad";
  int points = 1000, count = 9;
  double limit = kDefaultOpeningLimitDeg, sigma = 0.0, offset = 0.0;
  std::uint64_t seed = 1;
  std::optional<double> rate, duration;
  std::optional<unsigned short> port;
  bool debug = false;

  auto* sweep = app.add_subcommand("sweep", "Tabulate the gripper kinematics over the valid range");
  sweep->add_option("--geom", geom, "gripper geometry JSON")->check(CLI::ExistingFile);
  sweep->add_option("--out", out, "output CSV (stdout when omitted)");
  sweep->add_option("--points", points, "grid points")->check(CLI::Range(1, 10000000));
  sweep->add_option("--limit", limit, "opening limit, deg")->check(CLI::Range(0.0, 180.0));

  auto* val = app.add_subcommand("validate", "Compare the model against CAD or marker references");
  auto* cad_opt = val->add_option("--cad", cad, "reference table CSV")->check(CLI::ExistingFile);
  auto* mocap_opt = val->add_option("--mocap", mocap, "marker capture CSV")->check(CLI::ExistingFile);
  cad_opt->excludes(mocap_opt);
  val->add_option("--geom", geom, "gripper geometry JSON")->check(CLI::ExistingFile);
  val->add_option("--report", report, "per-point report CSV");
  val->add_option("--curve", curve, "model curve CSV");

  auto* tele = app.add_subcommand("teleop", "Run the control loop against the simulated instrument");
  tele->add_option("--input", input, "demo | replay:<input trace> | console");
  tele->add_option("--rate", rate, "loop rate, Hz")->check(CLI::PositiveNumber);
  tele->add_option("--duration", duration, "seconds to run")->check(CLI::NonNegativeNumber);
  tele->add_option("--telemetry", telemetry, "write per-tick telemetry CSV");
  tele->add_option("--port", port, "console bridge port");
  tele->add_flag("--debug", debug, "accept faultInject messages");

  std::string replay_path;
  auto* rep = app.add_subcommand("replay", "Re-run a telemetry trace and check it is reproduced exactly");
  rep->add_option("file", replay_path, "telemetry CSV")->required()->check(CLI::ExistingFile);

  auto* rec = app.add_subcommand("record", "Run a session offline and record its telemetry");
  rec->add_option("--out", out, "telemetry CSV")->required();
  rec->add_option("--input", input, "demo | replay:<input trace>");

  auto* syn = app.add_subcommand("synth", "Generate synthetic reference data");
  syn->add_option("--kind", kind, "cad | mocap")->check(CLI::IsMember({"cad", "mocap"}));
  syn->add_option("--out", out, "output CSV")->required();
  syn->add_option("--geom", geom, "gripper geometry JSON")->check(CLI::ExistingFile);
  syn->add_option("--count", count, "samples")->check(CLI::Range(1, 1000000));
  syn->add_option("--sigma", sigma, "marker noise, mm")->check(CLI::NonNegativeNumber);
  syn->add_option("--offset", offset, "angle offset added to CAD references, deg");
  syn->add_option("--seed", seed, "noise seed");

  CLI11_PARSE(app, argc, argv);

  try {
    const SystemConfig cfg = load_system(config_path);
    if (*sweep) return cmd_sweep(cfg, geom, out, points, limit);
    if (*val) {
      if (cad.empty() && mocap.empty()) throw CLI::RequiredError("--cad or --mocap");
      return cmd_validate(cfg, cad, mocap, geom, report, curve);
    }
    if (*tele) return cmd_teleop(cfg, input, rate, duration, telemetry, debug, port);
    if (*rep) return cmd_replay(cfg, replay_path);
    if (*rec) return cmd_record(cfg, out, input);
    if (*syn) return cmd_synth(cfg, kind, out, geom, count, sigma, offset, seed);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  return 0;
}
