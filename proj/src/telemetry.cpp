#include "flexinst/telemetry.hpp"

#include <fmt/format.h>

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "csv.hpp"
#include "flexinst/errors.hpp"

namespace flexinst {

std::string_view to_string(Mode m) noexcept {
  switch (m) {
    case Mode::Init: return "INIT";
    case Mode::Idle: return "IDLE";
    case Mode::Teleop: return "TELEOP";
    case Mode::Fault: return "FAULT";
  }
  return "?";
}

std::string_view to_string(FaultCause c) noexcept {
  switch (c) {
    case FaultCause::None: return "NONE";
    case FaultCause::BusOpenFail: return "BUS_OPEN_FAIL";
    case FaultCause::DriverAbsent: return "DRIVER_ABSENT";
    case FaultCause::LimitConfigFail: return "LIMIT_CONFIG_FAIL";
    case FaultCause::InputOpenFail: return "INPUT_OPEN_FAIL";
    case FaultCause::BusTimeout: return "BUS_TIMEOUT";
    case FaultCause::BusError: return "BUS_ERROR";
    case FaultCause::EncoderImplausible: return "ENCODER_IMPLAUSIBLE";
    case FaultCause::CommandNaN: return "COMMAND_NAN";
    case FaultCause::InputLost: return "INPUT_LOST";
  }
  return "?";
}

Mode mode_from_string(std::string_view s) {
  for (Mode m : {Mode::Init, Mode::Idle, Mode::Teleop, Mode::Fault}) {
    if (to_string(m) == s) return m;
  }
  throw std::invalid_argument("unknown mode '" + std::string(s) + "'");
}

FaultCause fault_cause_from_string(std::string_view s) {
  for (int i = 0; i <= static_cast<int>(FaultCause::InputLost); ++i) {
    const auto c = static_cast<FaultCause>(i);
    if (to_string(c) == s) return c;
  }
  throw std::invalid_argument("unknown fault cause '" + std::string(s) + "'");
}

namespace {

constexpr std::size_t kColumns = 32;

}  // namespace

std::string telemetry_header() {
  return "tick,mode,events,tx,ty,tz,rx,ry,rz,buttons,f_tx,f_ty,f_tz,f_rx,f_ry,f_rz,"
         "q1dot,q2dot,q3dot,q4dot,m_flex,m_ext,m_grip,m_head,m_shaft,"
         "q1,q2,q3,q4,theta_total,tip_width,fault";
}

std::string telemetry_units() {
  return "-,-,bits,count,count,count,count,count,count,bits,1,1,1,1,1,1,"
         "deg/s,deg/s,mm/s,deg/s,cmd,cmd,cmd,cmd,cmd,"
         "deg,deg,mm,deg,deg,mm,-";
}

std::string format_telemetry_row(const TelemetryRecord& r) {
  fmt::memory_buffer buf;
  auto out = std::back_inserter(buf);
  fmt::format_to(out, "{},{},{}", r.tick, to_string(r.mode), r.events);
  for (int c : r.raw.counts) fmt::format_to(out, ",{}", c);
  fmt::format_to(out, ",{}", r.raw.buttons);
  for (double v : r.filtered.values) fmt::format_to(out, ",{}", v);
  fmt::format_to(out, ",{},{},{},{}", r.command.q1_deg_s, r.command.q2_deg_s, r.command.q3_mm_s,
                 r.command.q4_deg_s);
  for (int s : r.motor_speeds) fmt::format_to(out, ",{}", s);
  fmt::format_to(out, ",{},{},{},{},{},{},{}", r.q1_deg, r.q2_deg, r.q3_mm, r.q4_deg,
                 r.theta_total_deg, r.tip_width_mm, to_string(r.fault));
  return fmt::to_string(buf);
}

TelemetryWriter::TelemetryWriter(std::ostream& out) : out_(out) {
  out_ << telemetry_header() << '\n' << telemetry_units() << '\n';
}

void TelemetryWriter::write(const TelemetryRecord& rec) { out_ << format_telemetry_row(rec) << '\n'; }

void record_trace(const std::filesystem::path& path, const std::vector<TelemetryRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  TelemetryWriter w(out);
  for (const auto& r : records) w.write(r);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<TelemetryRecord> parse_trace(std::istream& in) {
  std::vector<TelemetryRecord> records;
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) throw ParseError(1, "empty trace");
  ++line_no;
  csv::expect_header(line, telemetry_header(), line_no);
  if (!std::getline(in, line)) throw ParseError(2, "missing units row");
  ++line_no;
  csv::expect_header(line, telemetry_units(), line_no);

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    if (in.eof()) throw ParseError(line_no, "truncated row (no line terminator)");
    const auto f = csv::split(line);
    if (f.size() != kColumns) {
      throw ParseError(line_no, "expected " + std::to_string(kColumns) + " fields, got " +
                                    std::to_string(f.size()));
    }
    TelemetryRecord r;
    std::size_t i = 0;
    r.tick = csv::parse_number<std::uint64_t>(f[i++], line_no, "tick");
    try {
      r.mode = mode_from_string(f[i++]);
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, e.what());
    }
    r.events = csv::parse_number<std::uint32_t>(f[i++], line_no, "events");
    for (int& c : r.raw.counts) c = csv::parse_number<int>(f[i++], line_no, "axis count");
    r.raw.buttons = csv::parse_number<std::uint32_t>(f[i++], line_no, "buttons");
    for (double& v : r.filtered.values) v = csv::parse_number<double>(f[i++], line_no, "filtered axis");
    r.command.q1_deg_s = csv::parse_number<double>(f[i++], line_no, "q1dot");
    r.command.q2_deg_s = csv::parse_number<double>(f[i++], line_no, "q2dot");
    r.command.q3_mm_s = csv::parse_number<double>(f[i++], line_no, "q3dot");
    r.command.q4_deg_s = csv::parse_number<double>(f[i++], line_no, "q4dot");
    for (int& s : r.motor_speeds) s = csv::parse_number<int>(f[i++], line_no, "motor speed");
    r.q1_deg = csv::parse_number<double>(f[i++], line_no, "q1");
    r.q2_deg = csv::parse_number<double>(f[i++], line_no, "q2");
    r.q3_mm = csv::parse_number<double>(f[i++], line_no, "q3");
    r.q4_deg = csv::parse_number<double>(f[i++], line_no, "q4");
    r.theta_total_deg = csv::parse_number<double>(f[i++], line_no, "theta_total");
    r.tip_width_mm = csv::parse_number<double>(f[i++], line_no, "tip_width");
    try {
      r.fault = fault_cause_from_string(f[i++]);
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, e.what());
    }
    records.push_back(r);
  }
  return records;
}

std::vector<TelemetryRecord> replay_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_trace(in);
}

}  // namespace flexinst
