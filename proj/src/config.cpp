#include "flexinst/config.hpp"

#include <fstream>
#include <initializer_list>
#include <set>
#include <stdexcept>
#include <string>

#include "flexinst/errors.hpp"

namespace flexinst {
namespace {

using nlohmann::json;

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const char* section) {
  if (!j.is_object()) throw std::invalid_argument(std::string(section) + " must be an object");
  const std::set<std::string> known(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) {
      throw std::invalid_argument("unknown key '" + k + "' in " + section);
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

PriorityMode priority_from(const std::string& s) {
  if (s == "ALL_AXES") return PriorityMode::AllAxes;
  if (s == "DOMINANT_AXIS") return PriorityMode::DominantAxis;
  throw std::invalid_argument("priorityMode must be ALL_AXES or DOMINANT_AXIS");
}

}  // namespace

GripperGeometry gripper_from_json(const json& j) {
  reject_unknown(j, {"linkA", "linkB", "jawLength", "offset", "initialPivotSlider"}, "gripper");
  const GripperGeometry d = GripperGeometry::nominal();
  double a = d.link_a(), b = d.link_b(), lj = d.jaw_length(), h = d.offset(), l0 = d.pivot_slider();
  read(j, "linkA", a);
  read(j, "linkB", b);
  read(j, "jawLength", lj);
  read(j, "offset", h);
  read(j, "initialPivotSlider", l0);
  return {a, b, lj, h, l0};
}

json to_json(const GripperGeometry& g) {
  return {{"linkA", g.link_a()},
          {"linkB", g.link_b()},
          {"jawLength", g.jaw_length()},
          {"offset", g.offset()},
          {"initialPivotSlider", g.pivot_slider()}};
}

void SystemConfig::validate() const {
  flexure.validate();
  pipeline.validate();
  motor.validate();
  transmission.validate();
  fsm.validate();
  if (bridge.snapshot_decimation <= 0) throw DomainError("snapshot decimation must be positive");
}

ControllerConfig SystemConfig::controller_config() const {
  ControllerConfig c;
  c.estimator.gripper = gripper;
  c.estimator.flexure = flexure;
  c.estimator.transmission = transmission;
  c.estimator.motor = motor;
  c.estimator.opening_limit_deg = fsm.opening_limit_deg;
  c.estimator.q3_margin_mm = fsm.q3_margin_mm;
  c.estimator.q1_margin_deg = fsm.q1_margin_deg;
  c.pipeline = pipeline;
  c.fsm = fsm;
  return c;
}

PlantConfig SystemConfig::plant_config() const {
  PlantConfig p;
  p.motor = motor;
  p.transmission = transmission;
  p.flexure = flexure;
  p.gripper = gripper;
  return p;
}

SystemConfig config_from_json(const json& j) {
  reject_unknown(j, {"gripper", "flexure", "pipeline", "motor", "transmission", "fsm", "bridge"},
                 "config");
  SystemConfig c;
  if (j.contains("gripper")) c.gripper = gripper_from_json(j.at("gripper"));

  if (j.contains("flexure")) {
    const json& f = j.at("flexure");
    reject_unknown(f, {"notchHalfAngle", "notchesPerSide", "maxBend", "tendonOffset", "segmentPitch"},
                   "flexure");
    read(f, "notchHalfAngle", c.flexure.notch_half_angle_deg);
    read(f, "notchesPerSide", c.flexure.notches_per_side);
    read(f, "maxBend", c.flexure.max_bend_deg);
    read(f, "tendonOffset", c.flexure.tendon_offset_mm);
    read(f, "segmentPitch", c.flexure.segment_pitch_mm);
  }

  if (j.contains("pipeline")) {
    const json& p = j.at("pipeline");
    reject_unknown(p, {"rawRange", "deadZone", "filterCoeff", "zeroSnap", "gains", "priorityMode"},
                   "pipeline");
    read(p, "rawRange", c.pipeline.raw_range);
    read(p, "deadZone", c.pipeline.dead_zone);
    read(p, "filterCoeff", c.pipeline.filter_coeff);
    read(p, "zeroSnap", c.pipeline.zero_snap);
    if (p.contains("gains")) {
      const json& g = p.at("gains");
      reject_unknown(g, {"q1", "q2", "q3", "q4"}, "pipeline.gains");
      read(g, "q1", c.pipeline.gains.q1_deg_s);
      read(g, "q2", c.pipeline.gains.q2_deg_s);
      read(g, "q3", c.pipeline.gains.q3_mm_s);
      read(g, "q4", c.pipeline.gains.q4_deg_s);
    }
    if (p.contains("priorityMode")) c.pipeline.priority = priority_from(p.at("priorityMode").get<std::string>());
  }

  if (j.contains("motor")) {
    const json& m = j.at("motor");
    reject_unknown(m, {"omegaMax", "tau", "ticksPerRev"}, "motor");
    read(m, "omegaMax", c.motor.omega_max_deg_s);
    read(m, "tau", c.motor.tau_s);
    read(m, "ticksPerRev", c.motor.ticks_per_rev);
  }

  if (j.contains("transmission")) {
    const json& t = j.at("transmission");
    reject_unknown(t, {"gripperMmPerRev", "tendonMmPerRev", "headDegPerRev", "shaftDegPerRev"},
                   "transmission");
    read(t, "gripperMmPerRev", c.transmission.gripper_mm_per_rev);
    read(t, "tendonMmPerRev", c.transmission.tendon_mm_per_rev);
    read(t, "headDegPerRev", c.transmission.head_deg_per_rev);
    read(t, "shaftDegPerRev", c.transmission.shaft_deg_per_rev);
  }

  if (j.contains("fsm")) {
    const json& f = j.at("fsm");
    reject_unknown(f, {"rateHz", "resetHold", "openingLimit", "tensionGain", "plausibilityFactor",
                       "q3Margin", "q1Margin", "stallFraction", "stallTicks", "speedLimit",
                       "accelLimit"},
                   "fsm");
    read(f, "rateHz", c.fsm.rate_hz);
    read(f, "resetHold", c.fsm.reset_hold_s);
    read(f, "openingLimit", c.fsm.opening_limit_deg);
    read(f, "tensionGain", c.fsm.tension_gain);
    read(f, "plausibilityFactor", c.fsm.plausibility_factor);
    read(f, "q3Margin", c.fsm.q3_margin_mm);
    read(f, "q1Margin", c.fsm.q1_margin_deg);
    read(f, "stallFraction", c.fsm.stall_fraction);
    read(f, "stallTicks", c.fsm.stall_ticks);
    read(f, "speedLimit", c.fsm.speed_limit);
    read(f, "accelLimit", c.fsm.accel_limit);
  }

  if (j.contains("bridge")) {
    const json& b = j.at("bridge");
    reject_unknown(b, {"bindAddress", "port", "snapshotDecimation", "allowFaultInject"}, "bridge");
    read(b, "bindAddress", c.bridge.bind_address);
    read(b, "port", c.bridge.port);
    read(b, "snapshotDecimation", c.bridge.snapshot_decimation);
    read(b, "allowFaultInject", c.bridge.allow_fault_inject);
  }

  c.validate();
  return c;
}

json to_json(const SystemConfig& c) {
  json j;
  j["gripper"] = to_json(c.gripper);
  j["flexure"] = {{"notchHalfAngle", c.flexure.notch_half_angle_deg},
                  {"notchesPerSide", c.flexure.notches_per_side},
                  {"maxBend", c.flexure.max_bend_deg},
                  {"tendonOffset", c.flexure.tendon_offset_mm},
                  {"segmentPitch", c.flexure.segment_pitch_mm}};
  j["pipeline"] = {{"rawRange", c.pipeline.raw_range},
                   {"deadZone", c.pipeline.dead_zone},
                   {"filterCoeff", c.pipeline.filter_coeff},
                   {"zeroSnap", c.pipeline.zero_snap},
                   {"gains",
                    {{"q1", c.pipeline.gains.q1_deg_s},
                     {"q2", c.pipeline.gains.q2_deg_s},
                     {"q3", c.pipeline.gains.q3_mm_s},
                     {"q4", c.pipeline.gains.q4_deg_s}}},
                   {"priorityMode", c.pipeline.priority == PriorityMode::AllAxes ? "ALL_AXES"
                                                                                 : "DOMINANT_AXIS"}};
  j["motor"] = {{"omegaMax", c.motor.omega_max_deg_s},
                {"tau", c.motor.tau_s},
                {"ticksPerRev", c.motor.ticks_per_rev}};
  j["transmission"] = {{"gripperMmPerRev", c.transmission.gripper_mm_per_rev},
                       {"tendonMmPerRev", c.transmission.tendon_mm_per_rev},
                       {"headDegPerRev", c.transmission.head_deg_per_rev},
                       {"shaftDegPerRev", c.transmission.shaft_deg_per_rev}};
  j["fsm"] = {{"rateHz", c.fsm.rate_hz},
              {"resetHold", c.fsm.reset_hold_s},
              {"openingLimit", c.fsm.opening_limit_deg},
              {"tensionGain", c.fsm.tension_gain},
              {"plausibilityFactor", c.fsm.plausibility_factor},
              {"q3Margin", c.fsm.q3_margin_mm},
              {"q1Margin", c.fsm.q1_margin_deg},
              {"stallFraction", c.fsm.stall_fraction},
              {"stallTicks", c.fsm.stall_ticks},
              {"speedLimit", c.fsm.speed_limit},
              {"accelLimit", c.fsm.accel_limit}};
  j["bridge"] = {{"bindAddress", c.bridge.bind_address},
                 {"port", c.bridge.port},
                 {"snapshotDecimation", c.bridge.snapshot_decimation},
                 {"allowFaultInject", c.bridge.allow_fault_inject}};
  return j;
}

SystemConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  return config_from_json(json::parse(in));
}

GripperGeometry load_gripper_geometry(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open geometry " + path.string());
  const json j = json::parse(in);
  if (j.contains("gripper")) return config_from_json(j).gripper;
  return gripper_from_json(j);
}

}  // namespace flexinst
