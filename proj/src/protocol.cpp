#include "flexinst/protocol.hpp"

#include <algorithm>
#include <cmath>

#include "flexinst/errors.hpp"
#include "flexinst/input_source.hpp"
#include "json.hpp"

namespace flexinst::protocol {
namespace {

using nlohmann::json;

constexpr std::array<const char*, 6> kAxisKeys{"tx", "ty", "tz", "rx", "ry", "rz"};

void expect_keys(const json& j, std::initializer_list<std::string_view> allowed) {
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw ProtocolError("unknown field '" + item.key() + "'");
    }
  }
}

double axis_value(const json& j, const char* key) {
  if (!j.contains(key)) throw ProtocolError(std::string("missing axis '") + key + "'");
  const json& v = j.at(key);
  if (!v.is_number()) throw ProtocolError(std::string("axis '") + key + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x) || x < -1.0 || x > 1.0) {
    throw ProtocolError(std::string("axis '") + key + "' outside [-1, 1]");
  }
  return x;
}

Injection injection_from_string(std::string_view s) {
  if (s == "busTimeout") return Injection::BusTimeout;
  if (s == "encoderStuck") return Injection::EncoderStuck;
  if (s == "encoderGlitch") return Injection::EncoderGlitch;
  if (s == "driverAbsent") return Injection::DriverAbsent;
  if (s == "clear") return Injection::Clear;
  throw ProtocolError("unknown fault '" + std::string(s) + "'");
}

}  // namespace

ClientMessage parse_client_message(std::string_view text) {
  json j = json::parse(text.begin(), text.end(), nullptr, false);
  if (j.is_discarded()) throw ProtocolError("not valid JSON");
  if (!j.is_object()) throw ProtocolError("message must be a JSON object");
  if (!j.contains("type") || !j.at("type").is_string()) throw ProtocolError("missing 'type'");
  const std::string type = j.at("type").get<std::string>();

  if (type == "hello") {
    expect_keys(j, {"type", "client", "protocol"});
    if (j.contains("protocol") && j.at("protocol") != kVersion) {
      throw ProtocolError("unsupported protocol version");
    }
    Hello h;
    if (j.contains("client")) {
      if (!j.at("client").is_string()) throw ProtocolError("'client' must be a string");
      h.client = j.at("client").get<std::string>();
    }
    return h;
  }
  if (type == "axes") {
    expect_keys(j, {"type", "tx", "ty", "tz", "rx", "ry", "rz", "buttons"});
    Axes a;
    for (std::size_t i = 0; i < kAxisKeys.size(); ++i) a.values[i] = axis_value(j, kAxisKeys[i]);
    if (j.contains("buttons")) {
      const json& b = j.at("buttons");
      if (!b.is_number_integer() || b.get<std::int64_t>() < 0 || b.get<std::int64_t>() > 3) {
        throw ProtocolError("'buttons' must be an integer bitmask in [0, 3]");
      }
      a.buttons = b.get<std::uint32_t>();
    }
    return a;
  }
  if (type == "enable" || type == "disable" || type == "reset") {
    expect_keys(j, {"type"});
    if (type == "enable") return Command::Enable;
    if (type == "disable") return Command::Disable;
    return Command::Reset;
  }
  if (type == "faultInject") {
    expect_keys(j, {"type", "fault"});
    if (!j.contains("fault") || !j.at("fault").is_string()) throw ProtocolError("missing 'fault'");
    return FaultInject{injection_from_string(j.at("fault").get<std::string>())};
  }
  throw ProtocolError("unknown message type '" + type + "'");
}

std::string_view message_type(const ClientMessage& msg) noexcept {
  struct V {
    std::string_view operator()(const Hello&) const { return "hello"; }
    std::string_view operator()(const Axes&) const { return "axes"; }
    std::string_view operator()(Command c) const {
      return c == Command::Enable ? "enable" : c == Command::Disable ? "disable" : "reset";
    }
    std::string_view operator()(const FaultInject&) const { return "faultInject"; }
  };
  return std::visit(V{}, msg);
}

RawAxes to_raw_axes(const Axes& axes, int raw_range) {
  RawAxes raw;
  for (std::size_t i = 0; i < axes.values.size(); ++i) {
    const long v = std::lround(axes.values[i] * raw_range);
    raw.counts[i] = static_cast<int>(std::clamp<long>(v, -raw_range, raw_range));
  }
  raw.buttons = axes.buttons;
  return raw;
}

std::uint32_t to_events(Command c) noexcept {
  switch (c) {
    case Command::Enable: return event_bits::kEnable;
    case Command::Disable: return event_bits::kDisable;
    case Command::Reset: return event_bits::kReset;
  }
  return 0;
}

std::uint32_t to_events(Injection i) noexcept {
  switch (i) {
    case Injection::BusTimeout: return event_bits::kInjectBusTimeout;
    case Injection::EncoderStuck: return event_bits::kInjectEncoderStuck;
    case Injection::EncoderGlitch: return event_bits::kInjectEncoderGlitch;
    case Injection::DriverAbsent: return event_bits::kInjectDriverAbsent;
    case Injection::Clear: return event_bits::kClearInjections;
  }
  return 0;
}

std::string_view to_string(Injection i) noexcept {
  switch (i) {
    case Injection::BusTimeout: return "busTimeout";
    case Injection::EncoderStuck: return "encoderStuck";
    case Injection::EncoderGlitch: return "encoderGlitch";
    case Injection::DriverAbsent: return "driverAbsent";
    case Injection::Clear: return "clear";
  }
  return "?";
}

StateSnapshot snapshot_of(const TelemetryRecord& rec) {
  StateSnapshot s;
  s.tick = rec.tick;
  s.mode = rec.mode;
  s.q1_deg = rec.q1_deg;
  s.q2_deg = rec.q2_deg;
  s.q3_mm = rec.q3_mm;
  s.q4_deg = rec.q4_deg;
  s.theta_total_deg = rec.theta_total_deg;
  s.tip_width_mm = rec.tip_width_mm;
  if (rec.fault != FaultCause::None) s.faults.push_back(rec.fault);
  return s;
}

std::string encode_state(const StateSnapshot& s) {
  json faults = json::array();
  for (FaultCause c : s.faults) faults.push_back(std::string(to_string(c)));
  json j = {{"type", "state"},
            {"tick", s.tick},
            {"mode", std::string(to_string(s.mode))},
            {"q1", s.q1_deg},
            {"q2", s.q2_deg},
            {"q3", s.q3_mm},
            {"q4", s.q4_deg},
            {"thetaTotal", s.theta_total_deg},
            {"tipWidth", s.tip_width_mm},
            {"faults", faults}};
  return j.dump();
}

std::string encode_welcome(double rate_hz, double snapshot_hz, bool fault_inject) {
  return json{{"type", "welcome"},
              {"protocol", kVersion},
              {"rateHz", rate_hz},
              {"snapshotHz", snapshot_hz},
              {"faultInject", fault_inject}}
      .dump();
}

std::string encode_error(std::string_view reason) {
  return json{{"type", "error"}, {"reason", std::string(reason)}}.dump();
}

std::string encode_busy() { return json{{"type", "busy"}}.dump(); }

StateSnapshot decode_state(std::string_view text) {
  json j = json::parse(text.begin(), text.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object() || j.value("type", "") != "state") {
    throw ProtocolError("not a state message");
  }
  try {
    StateSnapshot s;
    s.tick = j.at("tick").get<std::uint64_t>();
    s.mode = mode_from_string(j.at("mode").get<std::string>());
    s.q1_deg = j.at("q1").get<double>();
    s.q2_deg = j.at("q2").get<double>();
    s.q3_mm = j.at("q3").get<double>();
    s.q4_deg = j.at("q4").get<double>();
    s.theta_total_deg = j.at("thetaTotal").get<double>();
    s.tip_width_mm = j.at("tipWidth").get<double>();
    for (const auto& f : j.at("faults")) s.faults.push_back(fault_cause_from_string(f.get<std::string>()));
    return s;
  } catch (const std::exception& e) {
    throw ProtocolError(std::string("bad state message: ") + e.what());
  }
}

}  // namespace flexinst::protocol
