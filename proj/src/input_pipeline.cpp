#include "flexinst/input_pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "flexinst/errors.hpp"

namespace flexinst {

void PipelineConfig::validate() const {
  if (raw_range <= 0) throw DomainError("raw range must be positive");
  if (!(dead_zone >= 0.0 && dead_zone < 1.0)) throw DomainError("dead-zone must be in [0, 1)");
  if (!(filter_coeff > 0.0 && filter_coeff <= 1.0)) {
    throw DomainError("filter coefficient must be in (0, 1]");
  }
  if (!(zero_snap >= 0.0)) throw DomainError("zero snap must be non-negative");
  if (!(gains.q1_deg_s > 0.0 && gains.q2_deg_s > 0.0 && gains.q3_mm_s > 0.0 &&
        gains.q4_deg_s > 0.0)) {
    throw DomainError("joint gains must be positive");
  }
}

NormalizedAxes normalize(const RawAxes& raw, int range) {
  if (range <= 0) throw DomainError("raw range must be positive");
  NormalizedAxes out;
  for (std::size_t i = 0; i < kAxisCount; ++i) {
    out.values[i] = std::clamp(static_cast<double>(raw.counts[i]) / range, -1.0, 1.0);
  }
  return out;
}

double dead_zone(double x, double threshold) {
  const double mag = std::abs(x);
  if (mag <= threshold) return 0.0;
  return std::copysign((mag - threshold) / (1.0 - threshold), x);
}

double low_pass(double prev, double x, double coeff) { return prev + coeff * (x - prev); }

JointVelocityCommand map_axes(const NormalizedAxes& f, const PipelineConfig& cfg) {
  // Candidate order doubles as the tie-break: bend, grip, head, shaft.
  const double ry = f[Axis::Ry];
  const double tz = f[Axis::Tz];
  const double rz = f[Axis::Rz];
  const double rx = f[Axis::Rx];

  JointVelocityCommand cmd;
  if (cfg.priority == PriorityMode::AllAxes) {
    cmd.q1_deg_s = cfg.gains.q1_deg_s * ry;
    cmd.q3_mm_s = cfg.gains.q3_mm_s * tz;
    cmd.q2_deg_s = cfg.gains.q2_deg_s * rz;
    cmd.q4_deg_s = cfg.gains.q4_deg_s * rx;
    return cmd;
  }

  const std::array<double, 4> mags{std::abs(ry), std::abs(tz), std::abs(rz), std::abs(rx)};
  std::size_t best = 0;
  for (std::size_t i = 1; i < mags.size(); ++i) {
    if (mags[i] > mags[best]) best = i;
  }
  if (mags[best] == 0.0) return cmd;
  switch (best) {
    case 0: cmd.q1_deg_s = cfg.gains.q1_deg_s * ry; break;
    case 1: cmd.q3_mm_s = cfg.gains.q3_mm_s * tz; break;
    case 2: cmd.q2_deg_s = cfg.gains.q2_deg_s * rz; break;
    default: cmd.q4_deg_s = cfg.gains.q4_deg_s * rx; break;
  }
  return cmd;
}

InputPipeline::InputPipeline(PipelineConfig cfg) : cfg_(cfg) { cfg_.validate(); }

PipelineOutput InputPipeline::process(const RawAxes& raw) {
  PipelineOutput out;
  out.normalized = normalize(raw, cfg_.raw_range);
  for (std::size_t i = 0; i < kAxisCount; ++i) {
    const double x = dead_zone(out.normalized.values[i], cfg_.dead_zone);
    double y = low_pass(state_.values[i], x, cfg_.filter_coeff);
    if (x == 0.0 && std::abs(y) < cfg_.zero_snap) y = 0.0;
    state_.values[i] = y;
  }
  out.filtered = state_;
  out.command = map_axes(out.filtered, cfg_);
  return out;
}

}  // namespace flexinst
