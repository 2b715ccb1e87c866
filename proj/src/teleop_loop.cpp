#include "flexinst/teleop_loop.hpp"

#include <thread>

namespace flexinst {

TeleopLoop::TeleopLoop(SystemConfig cfg, InputSource& input)
    : cfg_(std::move(cfg)),
      input_(input),
      plant_(cfg_.plant_config()),
      controller_(cfg_.controller_config(), plant_.bus(), input_) {
  cfg_.validate();
}

void TeleopLoop::apply_injections(std::uint32_t events) {
  namespace eb = event_bits;
  SimMotorBus& bus = plant_.bus();
  if (events & eb::kClearInjections) {
    for (std::size_t i = 0; i < kDriverCount; ++i) bus.set_driver_present(static_cast<DriverId>(i), true);
    for (std::size_t i = 0; i < kMotorCount; ++i) bus.set_encoder_stuck(static_cast<MotorRole>(i), false);
  }
  if (events & eb::kInjectBusTimeout) bus.inject_timeouts(1);
  if (events & eb::kInjectEncoderStuck) bus.set_encoder_stuck(MotorRole::Gripper, true);
  if (events & eb::kInjectEncoderGlitch) bus.inject_encoder_glitch(MotorRole::Gripper, 1000);
  if (events & eb::kInjectDriverAbsent) bus.set_driver_present(DriverId::B, false);
}

TelemetryRecord TeleopLoop::tick() {
  const TickInput in = input_.poll();
  apply_injections(in.events);
  TelemetryRecord rec = controller_.step(in, period_s());
  plant_.step(period_s());
  return rec;
}

std::vector<TelemetryRecord> run_session(const SystemConfig& cfg, std::vector<TickInput> inputs,
                                         PlantTruth* final_truth) {
  SequenceInputSource source(std::move(inputs));
  TeleopLoop loop(cfg, source);
  loop.initialize();
  std::vector<TelemetryRecord> out;
  out.reserve(source.size());
  while (!source.exhausted()) out.push_back(loop.tick());
  if (final_truth) *final_truth = loop.truth();
  return out;
}

TickInput ConsoleInputSource::poll() {
  std::lock_guard lock(mutex_);
  TickInput t{latest_, pending_events_};
  pending_events_ = 0;
  return t;
}

void ConsoleInputSource::submit_axes(const RawAxes& raw) {
  std::lock_guard lock(mutex_);
  latest_ = raw;
}

void ConsoleInputSource::post_events(std::uint32_t events) {
  std::lock_guard lock(mutex_);
  pending_events_ |= events;
}

void ConsoleInputSource::session_lost() {
  std::lock_guard lock(mutex_);
  latest_ = RawAxes{};
  pending_events_ |= event_bits::kInputLost;
}

void run_realtime(TeleopLoop& loop, const std::atomic<bool>& stop,
                  const std::function<void(const TelemetryRecord&)>& on_tick,
                  std::optional<std::uint64_t> max_ticks) {
  using clock = std::chrono::steady_clock;
  const auto period = std::chrono::duration_cast<clock::duration>(
      std::chrono::duration<double>(loop.period_s()));
  auto next = clock::now();
  std::uint64_t n = 0;
  while (!stop.load() && (!max_ticks || n < *max_ticks)) {
    const TelemetryRecord rec = loop.tick();
    if (on_tick) on_tick(rec);
    ++n;
    next += period;
    std::this_thread::sleep_until(next);
  }
}

}  // namespace flexinst
