#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <vector>

#include "flexinst/actuation_sim.hpp"
#include "flexinst/config.hpp"
#include "flexinst/control_fsm.hpp"
#include "flexinst/input_source.hpp"
#include "flexinst/telemetry.hpp"

namespace flexinst {

/// Controller wired to the simulated plant. Each tick polls the input
/// source, applies any fault injections to the plant, steps the controller
/// and then integrates the plant over one period.
class TeleopLoop {
 public:
  TeleopLoop(SystemConfig cfg, InputSource& input);

  const ControllerState& initialize() { return controller_.initialize(); }
  TelemetryRecord tick();

  double period_s() const noexcept { return cfg_.fsm.period_s(); }
  PlantTruth truth() const { return plant_.truth(); }
  const Controller& controller() const noexcept { return controller_; }
  FourDofPlant& plant() noexcept { return plant_; }
  const SystemConfig& config() const noexcept { return cfg_; }

 private:
  void apply_injections(std::uint32_t events);

  SystemConfig cfg_;
  InputSource& input_;
  FourDofPlant plant_;
  Controller controller_;
};

/// Offline run over a fixed input sequence (one record per input tick).
std::vector<TelemetryRecord> run_session(const SystemConfig& cfg, std::vector<TickInput> inputs,
                                         PlantTruth* final_truth = nullptr);

/// Mailbox-backed input fed by the console bridge.
class ConsoleInputSource final : public InputSource {
 public:
  bool open() override { return true; }
  TickInput poll() override;

  void submit_axes(const RawAxes& raw);
  void post_events(std::uint32_t events);
  /// Session gone: axes fall back to neutral and INPUT_LOST is queued.
  void session_lost();

 private:
  std::mutex mutex_;
  RawAxes latest_{};
  std::uint32_t pending_events_ = 0;
};

/// Runs `loop` against the wall clock at its configured rate until `stop`
/// is set or `max_ticks` ticks have run. `on_tick` sees every record.
void run_realtime(TeleopLoop& loop, const std::atomic<bool>& stop,
                  const std::function<void(const TelemetryRecord&)>& on_tick,
                  std::optional<std::uint64_t> max_ticks = std::nullopt);

}  // namespace flexinst
