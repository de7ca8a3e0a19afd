#include "erpmotion/geometry.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "erpmotion/raster.hpp"

namespace erpm {

using std::numbers::pi;

double pixel_longitude(double j, int width) { return ((j + 0.5) / width) * 2.0 * pi - pi; }

double pixel_latitude(double i, int height) { return pi / 2.0 - ((i + 0.5) / height) * pi; }

SphereDir pixel_to_dir(double i, double j, int height, int width) {
  require_erp_aspect(height, width, "pixel_to_dir");
  const double lon = pixel_longitude(j, width);
  const double lat = pixel_latitude(i, height);
  const double c = std::cos(lat);
  return {c * std::sin(lon), std::sin(lat), c * std::cos(lon)};
}

PixelCoord dir_to_pixel(const SphereDir& d, int height, int width) {
  require_erp_aspect(height, width, "dir_to_pixel");
  const double n = d.norm();
  if (!(std::abs(n - 1.0) <= kUnitTolerance)) {
    throw DomainError("dir_to_pixel: direction is not unit length (norm " + std::to_string(n) + ")");
  }
  const double horiz = std::hypot(d.x(), d.z());
  const double lat = std::atan2(d.y(), horiz);
  double lon = 0.0;
  if (horiz > 0.0) {
    lon = std::atan2(d.x(), d.z());
    if (lon >= pi) lon -= 2.0 * pi;
  }
  PixelCoord p;
  p.i = (pi / 2.0 - lat) / pi * height - 0.5;
  p.j = (lon + pi) / (2.0 * pi) * width - 0.5;
  if (p.j >= width - 0.5) p.j -= width;
  return p;
}

PixelIndex remap_pixel(int i, int j, int height, int width) {
  if (i < -(height - 1) || i > 2 * (height - 1)) {
    throw DomainError("remap_pixel: row " + std::to_string(i) + " overshoots more than one reflection (H=" +
                      std::to_string(height) + ")");
  }
  if (i < 0) return {-i, wrap_index(j + width / 2, width)};
  if (i >= height) return {2 * (height - 1) - i, wrap_index(j + width / 2, width)};
  return {i, wrap_index(j, width)};
}

double wrap_column_delta(double dj, int width) {
  const double w = width;
  double r = std::fmod(dj, w);
  if (r > w / 2.0) r -= w;
  if (r <= -w / 2.0) r += w;
  return r;
}

}  // namespace erpm
