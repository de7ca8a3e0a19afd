#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "erpmotion/flow.hpp"
#include "erpmotion/raster.hpp"

namespace erpm {

// Gaussian noise raster plus, per pixel, the number of source pixels that
// landed on it during the last warp (1 for freshly sampled noise, 0 where the
// value was refilled with fresh noise).
struct NoiseGrid {
  FloatRaster values;
  std::vector<std::uint32_t> counts;

  int height() const { return values.height(); }
  int width() const { return values.width(); }
  int channels() const { return values.channels(); }
  std::uint32_t count(int i, int j) const { return counts[static_cast<std::size_t>(i) * values.width() + j]; }
  bool operator==(const NoiseGrid&) const = default;
};

// i.i.d. standard normal values from CounterRng, counts == 1. Deterministic in
// (H, W, C, seed).
NoiseGrid sample_noise(int height, int width, int channels, std::uint64_t seed);

// Scatter / normalize / fill:
//  1. every source pixel p is sent to remap_pixel(round(p + (dv, du)))
//     (nearest integer, ties to even) and summed there per channel;
//  2. targets hit k >= 1 times get sum / sqrt(k);
//  3. targets never hit get fresh standard normal noise keyed by
//     (seed, pixel, channel).
// Sums run in source-index order, so the result does not depend on the
// parallel schedule. Flow and grid must share H and W; any W is accepted.
NoiseGrid warp_noise(const NoiseGrid& q, const FlowField& fwd, std::uint64_t seed);

// q_{t+1} = warp_noise(q_t, flows[t], derive_seed(seed, t)); returns all
// T + 1 grids starting with q0.
std::vector<NoiseGrid> warp_chain(const NoiseGrid& q0, const std::vector<FlowField>& flows, std::uint64_t seed);

// sqrt(1 - gamma) * q + sqrt(gamma) * eps with fresh eps; gamma in [0, 1].
NoiseGrid degrade(const NoiseGrid& q, double gamma, std::uint64_t seed);

struct RolledGrid {
  FloatRaster grid;
  int shift = 0;
};

// Column shift theta / 360 * W, which must be an exact integer (ConfigError
// otherwise). Positive theta moves content toward larger column indices.
int longitude_shift(double theta_deg, int width);
RolledGrid roll_longitude(const FloatRaster& grid, double theta_deg);
// Undoes an accumulated total of shifts.
FloatRaster unroll(const FloatRaster& grid, long long accumulated_shift);

// ERPF container of the values followed by H * W little-endian u16 counts
// (saturating at 65535).
void write_noise(const NoiseGrid& q, const std::filesystem::path& path);
NoiseGrid read_noise(const std::filesystem::path& path);

}  // namespace erpm
