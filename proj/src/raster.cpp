#include "erpmotion/raster.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "erpmotion/geometry.hpp"

namespace erpm {

namespace {

void validate_erp_image(const FloatRaster& r) {
  if (r.height() < 2 || r.width() < 2) throw ShapeError("ErpImage needs H >= 2 and W >= 2");
  if (r.channels() != 1 && r.channels() != 3) throw ShapeError("ErpImage needs 1 or 3 channels");
  for (float v : r.values()) {
    if (!std::isfinite(v)) throw DomainError("ErpImage intensities must be finite");
  }
}

}  // namespace

ErpImage::ErpImage(int height, int width, int channels, float fill) : FloatRaster(height, width, channels, fill) {
  validate_erp_image(*this);
}

ErpImage::ErpImage(FloatRaster raster) : FloatRaster(std::move(raster)) { validate_erp_image(*this); }

void require_erp_aspect(int height, int width, const char* what) {
  if (width != 2 * height) {
    throw ShapeError(std::string(what) + ": requires W == 2H, got " + std::to_string(height) + "x" +
                     std::to_string(width));
  }
}

ErpImage to_gray(const ErpImage& img) {
  if (img.channels() == 1) return img;
  ErpImage out(img.height(), img.width(), 1);
  for (int i = 0; i < img.height(); ++i) {
    for (int j = 0; j < img.width(); ++j) {
      const auto p = img.pixel(i, j);
      out.at(i, j) = static_cast<float>(0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]);
    }
  }
  return out;
}

ErpImage resize_bilinear(const ErpImage& img, int height, int width) {
  if (height == img.height() && width == img.width()) return img;
  ErpImage out(height, width, img.channels());
  const double sy = static_cast<double>(img.height()) / height;
  const double sx = static_cast<double>(img.width()) / width;
  for (int i = 0; i < height; ++i) {
    const double y = std::clamp((i + 0.5) * sy - 0.5, 0.0, img.height() - 1.0);
    const int y0 = static_cast<int>(std::floor(y));
    const int y1 = std::min(y0 + 1, img.height() - 1);
    const double fy = y - y0;
    for (int j = 0; j < width; ++j) {
      const double x = (j + 0.5) * sx - 0.5;
      const int xf = static_cast<int>(std::floor(x));
      const double fx = x - xf;
      const int x0 = wrap_index(xf, img.width());
      const int x1 = wrap_index(xf + 1, img.width());
      for (int c = 0; c < img.channels(); ++c) {
        const double top = (1 - fx) * img.at(y0, x0, c) + fx * img.at(y0, x1, c);
        const double bot = (1 - fx) * img.at(y1, x0, c) + fx * img.at(y1, x1, c);
        out.at(i, j, c) = static_cast<float>((1 - fy) * top + fy * bot);
      }
    }
  }
  return out;
}

ErpImage resize_min_dim(const ErpImage& img, int min_dim) {
  if (min_dim <= 0) throw DomainError("resize_min_dim: target must be positive");
  const int small = std::min(img.height(), img.width());
  if (small == min_dim) return img;
  const double scale = static_cast<double>(min_dim) / small;
  const int h = std::max(2, static_cast<int>(std::lround(img.height() * scale)));
  const int w = std::max(2, static_cast<int>(std::lround(img.width() * scale)));
  return resize_bilinear(img, h, w);
}

}  // namespace erpm
