#pragma once

#include <cmath>

#include "erpmotion/geometry.hpp"
#include "erpmotion/parallel.hpp"

namespace erpm {

// Rounds displacements within 1e-9 px of an integer onto it, so identity and
// integer-column motions give exact pixel flows.
inline double snap_to_pixel(double d) {
  const double r = std::nearbyint(d);
  return std::abs(d - r) < 1e-9 ? r : d;
}

template <typename TargetFn>
FlowField flow_from_targets(int height, int width, TargetFn&& target) {
  FlowField out(height, width);
  parallel_for(static_cast<std::size_t>(height), [&](std::size_t row) {
    const int i = static_cast<int>(row);
    for (int j = 0; j < width; ++j) {
      const SphereDir t = target(i, j);
      const PixelCoord q = dir_to_pixel(t.normalized(), height, width);
      out.du(i, j) = static_cast<float>(snap_to_pixel(wrap_column_delta(q.j - j, width)));
      out.dv(i, j) = static_cast<float>(snap_to_pixel(q.i - i));
    }
  });
  return out;
}

}  // namespace erpm
