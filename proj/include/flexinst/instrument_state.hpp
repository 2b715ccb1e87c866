#pragma once

#include "flexinst/gripper_model.hpp"

namespace flexinst {

/// Joint configuration of the instrument plus the jaw quantities derived from q3.
struct InstrumentState {
  double q1_deg = 0.0;  ///< flexure bend, [0, max bend]
  double q2_deg = 0.0;  ///< distal head rotation, wrapped to [0, 360)
  double q3_mm = 0.0;   ///< gripper slider displacement dL
  double q4_deg = 0.0;  ///< shaft rotation, wrapped to [0, 360)
  GripperState jaw;
};

}  // namespace flexinst
