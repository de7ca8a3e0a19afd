#pragma once

#include "erpmotion/flow.hpp"
#include "erpmotion/raster.hpp"

namespace erpm {

struct BlockMatchParams {
  // Pyramid levels including full resolution; 0 selects
  // ceil(log2(min(H, W) / 16)), at least 1.
  int levels = 0;
  // Integer search radius per level, in pixels of that level.
  int radius = 4;
  // Block edge length in pixels.
  int block = 8;
};

int default_pyramid_levels(int height, int width);

// Coarse-to-fine block matching with horizontal wrap-around. Each level
// refines the upsampled estimate of the coarser level by an exhaustive
// integer SSD search over +-radius, followed by a per-axis parabolic
// sub-pixel fit. Block-center vectors are bilinearly interpolated to a dense
// field. SSD ties go to the smaller search offset, so flat regions keep the
// propagated estimate (zero on the coarsest level).
//
// Sign convention: a(p) ~ b(p + (dv, du)).
FlowField estimate_flow(const ErpImage& a, const ErpImage& b, const BlockMatchParams& params = {});

}  // namespace erpm
