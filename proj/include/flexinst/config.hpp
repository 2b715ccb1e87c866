#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "flexinst/actuation_sim.hpp"
#include "flexinst/control_fsm.hpp"
#include "flexinst/flexure_model.hpp"
#include "flexinst/gripper_model.hpp"
#include "flexinst/input_pipeline.hpp"

namespace flexinst {

struct BridgeConfig {
  std::string bind_address = "127.0.0.1";
  unsigned short port = 8765;
  /// Publish one state snapshot every N loop ticks (5 → 20 Hz at 100 Hz).
  int snapshot_decimation = 5;
  bool allow_fault_inject = false;
};

/// Every tunable of the stack, loadable from one JSON file. Missing keys
/// keep their defaults; unknown keys are rejected.
struct SystemConfig {
  GripperGeometry gripper = GripperGeometry::nominal();
  FlexureGeometry flexure;
  PipelineConfig pipeline;
  MotorParams motor;
  Transmission transmission;
  FsmConfig fsm;
  BridgeConfig bridge;

  void validate() const;
  ControllerConfig controller_config() const;
  PlantConfig plant_config() const;
};

SystemConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SystemConfig& cfg);
SystemConfig load_config(const std::filesystem::path& path);

GripperGeometry gripper_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GripperGeometry& g);
/// Accepts either a bare gripper object or a full config with a "gripper" section.
GripperGeometry load_gripper_geometry(const std::filesystem::path& path);

}  // namespace flexinst
