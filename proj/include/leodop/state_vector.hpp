#pragma once

#include "leodop/geometry.hpp"

namespace leodop {

/// Unknowns of the positioning problem. The receiver clock drift is carried
/// pre-multiplied by the speed of light.
struct StateVector {
  Vec3 position_ecef = Vec3::Zero();
  double clock_drift_scaled = 0.0;  // m/s
  double time_offset = 0.0;         // s
};

}  // namespace leodop
