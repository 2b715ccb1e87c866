#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <vector>

#include "flexinst/input_pipeline.hpp"

namespace flexinst {

/// Events that arrive outside the device axes: console commands and debug
/// fault injections. Carried as a bitmask per tick so traces can replay them.
namespace event_bits {
inline constexpr std::uint32_t kEnable = 1u << 0;
inline constexpr std::uint32_t kDisable = 1u << 1;
inline constexpr std::uint32_t kReset = 1u << 2;
inline constexpr std::uint32_t kInputLost = 1u << 3;
inline constexpr std::uint32_t kInjectBusTimeout = 1u << 4;
inline constexpr std::uint32_t kInjectEncoderStuck = 1u << 5;
inline constexpr std::uint32_t kInjectEncoderGlitch = 1u << 6;
inline constexpr std::uint32_t kInjectDriverAbsent = 1u << 7;
inline constexpr std::uint32_t kClearInjections = 1u << 8;
inline constexpr std::uint32_t kInjectionMask = kInjectBusTimeout | kInjectEncoderStuck |
                                                kInjectEncoderGlitch | kInjectDriverAbsent |
                                                kClearInjections;
}  // namespace event_bits

struct TickInput {
  RawAxes raw;
  std::uint32_t events = 0;
  friend bool operator==(const TickInput&, const TickInput&) = default;
};

/// Master-side input device as seen by the control loop.
class InputSource {
 public:
  virtual ~InputSource() = default;
  virtual bool open() = 0;
  /// Sample for the current tick; called exactly once per tick.
  virtual TickInput poll() = 0;
};

/// Plays back a fixed per-tick sequence; zero input once exhausted.
class SequenceInputSource final : public InputSource {
 public:
  explicit SequenceInputSource(std::vector<TickInput> ticks) : ticks_(std::move(ticks)) {}

  bool open() override { return true; }
  TickInput poll() override { return next_ < ticks_.size() ? ticks_[next_++] : TickInput{}; }

  std::size_t size() const noexcept { return ticks_.size(); }
  bool exhausted() const noexcept { return next_ >= ticks_.size(); }

 private:
  std::vector<TickInput> ticks_;
  std::size_t next_ = 0;
};

/// Input trace CSV: header `tick,tx,ty,tz,rx,ry,rz,buttons[,events]`, a units row,
/// one row per tick. Throws ParseError with the offending line.
std::vector<TickInput> read_input_trace(const std::filesystem::path& path);
void write_input_trace(const std::filesystem::path& path, const std::vector<TickInput>& ticks);

/// Built-in 30 s demonstration session at `rate_hz`: enable, open-close the
/// gripper, bend 0 → 90°, rotate head and shaft, release, disable.
std::vector<TickInput> demo_session(double rate_hz = 100.0, int raw_range = 350);

}  // namespace flexinst
