#include "erpmotion/noise.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "erpmotion/error.hpp"
#include "erpmotion/geometry.hpp"
#include "erpmotion/image_io.hpp"
#include "erpmotion/parallel.hpp"
#include "erpmotion/rng.hpp"

namespace erpm {

NoiseGrid sample_noise(int height, int width, int channels, std::uint64_t seed) {
  NoiseGrid q{FloatRaster(height, width, channels), {}};
  q.counts.assign(q.values.pixel_count(), 1u);
  const CounterRng rng(derive_seed(seed, "sample-noise"));
  auto v = q.values.values();
  parallel_for(static_cast<std::size_t>(height), [&](std::size_t row) {
    const std::size_t begin = row * static_cast<std::size_t>(width) * channels;
    const std::size_t end = begin + static_cast<std::size_t>(width) * channels;
    for (std::size_t k = begin; k < end; ++k) v[k] = static_cast<float>(rng.normal(k));
  });
  return q;
}

NoiseGrid warp_noise(const NoiseGrid& q, const FlowField& fwd, std::uint64_t seed) {
  const int h = q.height();
  const int w = q.width();
  const int nc = q.channels();
  if (fwd.height() != h || fwd.width() != w) {
    throw ShapeError("warp_noise: flow " + std::to_string(fwd.height()) + "x" + std::to_string(fwd.width()) +
                     " does not match noise " + std::to_string(h) + "x" + std::to_string(w));
  }
  if (!fwd.all_finite()) throw DomainError("warp_noise: flow has non-finite values");

  const std::size_t n = q.values.pixel_count();
  std::vector<std::size_t> target(n);
  parallel_for(static_cast<std::size_t>(h), [&](std::size_t row) {
    const int i = static_cast<int>(row);
    for (int j = 0; j < w; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * w + j;
      const double ti = std::nearbyint(i + static_cast<double>(fwd.dv_values()[k]));
      const double tj = std::nearbyint(j + static_cast<double>(fwd.du_values()[k]));
      if (std::abs(ti) > 4.0 * h || std::abs(tj) > 1e9) throw DomainError("warp_noise: flow overshoots the grid");
      const PixelIndex t = remap_pixel(static_cast<int>(ti), static_cast<int>(tj), h, w);
      target[k] = static_cast<std::size_t>(t.i) * w + t.j;
    }
  });

  std::vector<double> sum(n * nc, 0.0);
  std::vector<std::uint32_t> count(n, 0u);
  const auto src = q.values.values();
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t t = target[k];
    ++count[t];
    for (int c = 0; c < nc; ++c) sum[t * nc + c] += src[k * nc + c];
  }

  NoiseGrid out{FloatRaster(h, w, nc), std::move(count)};
  const CounterRng fill(derive_seed(seed, "warp-fill"));
  auto dst = out.values.values();
  parallel_for(n, [&](std::size_t t) {
    const std::uint32_t k = out.counts[t];
    for (int c = 0; c < nc; ++c) {
      const std::size_t idx = t * nc + c;
      if (k == 0) {
        dst[idx] = static_cast<float>(fill.normal(idx));
      } else if (k == 1) {
        dst[idx] = static_cast<float>(sum[idx]);
      } else {
        dst[idx] = static_cast<float>(sum[idx] / std::sqrt(static_cast<double>(k)));
      }
    }
  });
  return out;
}

std::vector<NoiseGrid> warp_chain(const NoiseGrid& q0, const std::vector<FlowField>& flows, std::uint64_t seed) {
  std::vector<NoiseGrid> chain{q0};
  chain.reserve(flows.size() + 1);
  for (std::size_t t = 0; t < flows.size(); ++t) {
    try {
      chain.push_back(warp_noise(chain.back(), flows[t], derive_seed(seed, static_cast<std::uint64_t>(t))));
    } catch (const Error& e) {
      throw DomainError("warp_chain: frame " + std::to_string(t) + ": " + e.what());
    }
  }
  return chain;
}

NoiseGrid degrade(const NoiseGrid& q, double gamma, std::uint64_t seed) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw DomainError("degrade: gamma must lie in [0, 1]");
  if (gamma == 0.0) return q;
  NoiseGrid out = q;
  const CounterRng rng(derive_seed(seed, "degrade"));
  const double keep = std::sqrt(1.0 - gamma);
  const double mix = std::sqrt(gamma);
  auto v = out.values.values();
  const auto src = q.values.values();
  parallel_for(v.size(), [&](std::size_t k) { v[k] = static_cast<float>(keep * src[k] + mix * rng.normal(k)); });
  return out;
}

int longitude_shift(double theta_deg, int width) {
  if (!std::isfinite(theta_deg) || width <= 0) throw ConfigError("roll_longitude: invalid angle or width");
  const double s = theta_deg / 360.0 * width;
  const double r = std::round(s);
  if (std::abs(s - r) > 1e-9 * std::max(1.0, std::abs(s))) {
    throw ConfigError("roll_longitude: theta/360*W = " + std::to_string(s) + " is not an integer column count");
  }
  return static_cast<int>(r);
}

RolledGrid roll_longitude(const FloatRaster& grid, double theta_deg) {
  const int shift = longitude_shift(theta_deg, grid.width());
  return {roll_columns(grid, shift), shift};
}

FloatRaster unroll(const FloatRaster& grid, long long accumulated_shift) {
  const long long w = grid.width();
  const long long s = ((-accumulated_shift % w) + w) % w;
  return roll_columns(grid, static_cast<int>(s));
}

void write_noise(const NoiseGrid& q, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError(path.string() + ": cannot open for writing");
  write_erpf(os, q.values);
  for (std::uint32_t c : q.counts) put_u16(os, static_cast<std::uint16_t>(std::min<std::uint32_t>(c, 65535u)));
  if (!os) throw FormatError(path.string() + ": write failed");
}

NoiseGrid read_noise(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError(path.string() + ": cannot open");
  NoiseGrid q{read_erpf(is, path.string()), {}};
  q.counts.resize(q.values.pixel_count());
  for (auto& c : q.counts) c = get_u16(is, path.string());
  return q;
}

}  // namespace erpm
