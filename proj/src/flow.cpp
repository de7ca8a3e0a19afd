#include "erpmotion/flow.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "erpmotion/error.hpp"
#include "erpmotion/geometry.hpp"
#include "erpmotion/parallel.hpp"

namespace erpm {

FlowField::FlowField(int height, int width) : height_(height), width_(width) {
  if (height <= 0 || width <= 0) throw ShapeError("flow field dimensions must be positive");
  du_.assign(static_cast<std::size_t>(height) * width, 0.0f);
  dv_.assign(static_cast<std::size_t>(height) * width, 0.0f);
}

bool FlowField::all_finite() const {
  return std::all_of(du_.begin(), du_.end(), [](float v) { return std::isfinite(v); }) &&
         std::all_of(dv_.begin(), dv_.end(), [](float v) { return std::isfinite(v); });
}

FlowField FlowField::uniform(int height, int width, float du, float dv) {
  FlowField f(height, width);
  std::fill(f.du_.begin(), f.du_.end(), du);
  std::fill(f.dv_.begin(), f.dv_.end(), dv);
  return f;
}

SphericalFlow::SphericalFlow(VectorField3 f) : f_(std::move(f)) {
  require_erp_aspect(f_.height(), f_.width(), "SphericalFlow");
  for (int i = 0; i < f_.height(); ++i) {
    for (int j = 0; j < f_.width(); ++j) {
      const double n = (pixel_to_dir(i, j, f_.height(), f_.width()) + f_.at(i, j)).norm();
      if (!(std::abs(n - 1.0) <= kEndpointTolerance)) {
        throw DomainError("SphericalFlow: endpoint off the unit sphere at (" + std::to_string(i) + ", " +
                          std::to_string(j) + ")");
      }
    }
  }
}

SphericalFlow pixel_to_spherical(const FlowField& f) {
  const int h = f.height();
  const int w = f.width();
  require_erp_aspect(h, w, "pixel_to_spherical");
  VectorField3 out(h, w);
  parallel_for(static_cast<std::size_t>(h), [&](std::size_t row) {
    const int i = static_cast<int>(row);
    for (int j = 0; j < w; ++j) {
      const SphereDir x = pixel_to_dir(i, j, h, w);
      const SphereDir xt = pixel_to_dir(i + static_cast<double>(f.dv(i, j)), j + static_cast<double>(f.du(i, j)), h, w);
      out.at(i, j) = xt - x;
    }
  });
  return SphericalFlow(std::move(out));
}

FlowField spherical_to_pixel(const SphericalFlow& f) {
  const int h = f.height();
  const int w = f.width();
  return flow_from_targets(h, w, [&](int i, int j) { return SphereDir(pixel_to_dir(i, j, h, w) + f.at(i, j)); });
}

EpeResult epe_map(const FlowField& est, const FlowField& ref) {
  if (!est.same_shape(ref)) throw ShapeError("epe: flow fields differ in shape");
  EpeResult r;
  r.per_pixel.resize(est.pixel_count());
  double sum = 0.0;
  const int w = est.width();
  for (std::size_t k = 0; k < est.pixel_count(); ++k) {
    const double du = wrap_column_delta(static_cast<double>(est.du_values()[k]) - ref.du_values()[k], w);
    const double dv = static_cast<double>(est.dv_values()[k]) - ref.dv_values()[k];
    const double e = std::hypot(du, dv);
    r.per_pixel[k] = static_cast<float>(e);
    sum += e;
  }
  r.mean = sum / static_cast<double>(est.pixel_count());
  return r;
}

double epe(const FlowField& est, const FlowField& ref) { return epe_map(est, ref).mean; }

double mean_magnitude(const FlowField& f) {
  double sum = 0.0;
  for (std::size_t k = 0; k < f.pixel_count(); ++k) {
    sum += std::hypot(static_cast<double>(f.du_values()[k]), static_cast<double>(f.dv_values()[k]));
  }
  return f.pixel_count() ? sum / static_cast<double>(f.pixel_count()) : 0.0;
}

namespace {

// Middlebury color wheel (RY, YG, GC, CB, BM, MR segment lengths).
std::vector<std::array<double, 3>> make_color_wheel() {
  constexpr int RY = 15, YG = 6, GC = 4, CB = 11, BM = 13, MR = 6;
  std::vector<std::array<double, 3>> wheel;
  for (int k = 0; k < RY; ++k) wheel.push_back({1.0, static_cast<double>(k) / RY, 0.0});
  for (int k = 0; k < YG; ++k) wheel.push_back({1.0 - static_cast<double>(k) / YG, 1.0, 0.0});
  for (int k = 0; k < GC; ++k) wheel.push_back({0.0, 1.0, static_cast<double>(k) / GC});
  for (int k = 0; k < CB; ++k) wheel.push_back({0.0, 1.0 - static_cast<double>(k) / CB, 1.0});
  for (int k = 0; k < BM; ++k) wheel.push_back({static_cast<double>(k) / BM, 0.0, 1.0});
  for (int k = 0; k < MR; ++k) wheel.push_back({1.0, 0.0, 1.0 - static_cast<double>(k) / MR});
  return wheel;
}

}  // namespace

ErpImage flow_to_color(const FlowField& f, std::optional<double> max_mag) {
  const std::size_t n = f.pixel_count();
  std::vector<double> mags(n);
  for (std::size_t k = 0; k < n; ++k) mags[k] = std::hypot(f.du_values()[k], f.dv_values()[k]);
  double scale = 0.0;
  if (max_mag) {
    scale = *max_mag;
  } else if (n > 0) {
    std::vector<double> sorted = mags;
    const std::size_t q = std::min(n - 1, static_cast<std::size_t>(std::floor(0.99 * (n - 1))));
    std::nth_element(sorted.begin(), sorted.begin() + q, sorted.end());
    scale = sorted[q];
  }
  static const auto wheel = make_color_wheel();
  const int ncols = static_cast<int>(wheel.size());
  ErpImage out(std::max(2, f.height()), std::max(2, f.width()), 3, 1.0f);
  for (int i = 0; i < f.height(); ++i) {
    for (int j = 0; j < f.width(); ++j) {
      const std::size_t k = f.index(i, j);
      const double rad = scale > 0.0 ? mags[k] / scale : 0.0;
      if (rad == 0.0) continue;
      const double a = std::atan2(-f.dv(i, j), -f.du(i, j)) / std::numbers::pi;
      const double fk = (a + 1.0) / 2.0 * (ncols - 1);
      const int k0 = static_cast<int>(std::floor(fk));
      const int k1 = (k0 + 1) % ncols;
      const double t = fk - k0;
      for (int c = 0; c < 3; ++c) {
        double col = (1.0 - t) * wheel[k0][c] + t * wheel[k1][c];
        col = rad <= 1.0 ? 1.0 - rad * (1.0 - col) : col * 0.75;
        out.at(i, j, c) = static_cast<float>(std::clamp(col, 0.0, 1.0));
      }
    }
  }
  return out;
}

}  // namespace erpm
