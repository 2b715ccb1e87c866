#include "flexinst/input_source.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <string>

#include "csv.hpp"

namespace flexinst {
namespace {

constexpr std::string_view kHeader = "tick,tx,ty,tz,rx,ry,rz,buttons,events";
constexpr std::string_view kHeaderNoEvents = "tick,tx,ty,tz,rx,ry,rz,buttons";
constexpr std::string_view kUnits = "-,count,count,count,count,count,count,bits,bits";

}  // namespace

std::vector<TickInput> read_input_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "empty input trace");
  while (!line.empty() && line.back() == '\r') line.pop_back();
  const bool has_events = line == kHeader;
  if (!has_events && line != kHeaderNoEvents) {
    throw ParseError(1, "expected header '" + std::string(kHeader) + "'");
  }
  if (!std::getline(in, line)) throw ParseError(2, "missing units row");

  std::vector<TickInput> ticks;
  std::size_t line_no = 2;
  const std::size_t expected = has_events ? 9 : 8;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = csv::split(line);
    if (f.size() != expected) {
      throw ParseError(line_no, "expected " + std::to_string(expected) + " fields");
    }
    const auto tick = csv::parse_number<std::uint64_t>(f[0], line_no, "tick");
    if (tick != ticks.size()) throw ParseError(line_no, "ticks must be consecutive from 0");
    TickInput t;
    for (std::size_t i = 0; i < kAxisCount; ++i) {
      t.raw.counts[i] = csv::parse_number<int>(f[1 + i], line_no, "axis count");
    }
    t.raw.buttons = csv::parse_number<std::uint32_t>(f[7], line_no, "buttons");
    if (has_events) t.events = csv::parse_number<std::uint32_t>(f[8], line_no, "events");
    ticks.push_back(t);
  }
  return ticks;
}

void write_input_trace(const std::filesystem::path& path, const std::vector<TickInput>& ticks) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << kHeader << '\n' << kUnits << '\n';
  for (std::size_t i = 0; i < ticks.size(); ++i) {
    const auto& t = ticks[i];
    out << fmt::format("{},{},{},{},{},{},{},{},{}\n", i, t.raw.counts[0], t.raw.counts[1],
                       t.raw.counts[2], t.raw.counts[3], t.raw.counts[4], t.raw.counts[5],
                       t.raw.buttons, t.events);
  }
}

std::vector<TickInput> demo_session(double rate_hz, int raw_range) {
  const auto n = static_cast<std::size_t>(std::lround(30.0 * rate_hz));
  std::vector<TickInput> ticks(n);
  auto at = [&](double t) { return static_cast<std::size_t>(std::lround(t * rate_hz)); };
  auto hold = [&](double from, double to, Axis axis, double deflection) {
    for (std::size_t i = at(from); i < std::min(n, at(to)); ++i) {
      ticks[i].raw[axis] = static_cast<int>(std::lround(deflection * raw_range));
    }
  };
  auto press = [&](double when) {
    for (std::size_t i = at(when); i < std::min(n, at(when + 0.1)); ++i) {
      ticks[i].raw.buttons |= kButtonLeft;
    }
  };

  press(0.5);                          // enable
  hold(1.0, 5.5, Axis::Tz, 1.0);       // open to the limit
  hold(6.0, 10.0, Axis::Tz, -1.0);     // close
  hold(10.5, 14.5, Axis::Ry, 1.0);     // bend to 90
  hold(15.0, 17.0, Axis::Rz, 1.0);     // head rotation
  hold(17.0, 18.0, Axis::Rx, -1.0);    // shaft rotation
  hold(19.0, 20.0, Axis::Ry, -0.6);    // partial unbend
  hold(21.0, 22.0, Axis::Tz, 0.5);     // partial opening
  press(29.0);                         // disable
  return ticks;
}

}  // namespace flexinst
