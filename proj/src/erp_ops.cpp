#include "erpmotion/erp_ops.hpp"

#include <cmath>
#include <string>

#include "erpmotion/error.hpp"
#include "erpmotion/parallel.hpp"

namespace erpm {

namespace {

constexpr double kSnap = 1e-6;

double snap(double x) {
  const double r = std::round(x);
  return std::abs(x - r) < kSnap ? r : x;
}

}  // namespace

PixelIndex fold_pixel(int i, int j, int height, int width) {
  if (height == 1) return {0, wrap_index(j, width)};
  const int period = 2 * (height - 1);
  // Two successive reflections translate the row by one period and shift the
  // column by a full W, so far-out rows can be reduced by whole periods first.
  int row = i;
  if (row < -period || row >= 2 * period) row = wrap_index(row, period);
  int reflections = 0;
  while (row < 0 || row >= height) {
    row = row < 0 ? -row : period - row;
    ++reflections;
  }
  const int col = (reflections % 2 == 1) ? j + width / 2 : j;
  return {row, wrap_index(col, width)};
}

void bilinear_sample(const FloatRaster& img, double i, double j, std::span<float> out) {
  const int h = img.height();
  const int w = img.width();
  const int nc = img.channels();
  i = snap(i);
  j = snap(j);
  const double fi0 = std::floor(i);
  const double fj0 = std::floor(j);
  const double fi = i - fi0;
  const double fj = j - fj0;
  const int i0 = static_cast<int>(fi0);
  const int j0 = static_cast<int>(fj0);

  if (fi == 0.0 && fj == 0.0) {
    const PixelIndex p = fold_pixel(i0, j0, h, w);
    const auto src = img.pixel(p.i, p.j);
    for (int c = 0; c < nc; ++c) out[c] = src[c];
    return;
  }
  const PixelIndex p00 = fold_pixel(i0, j0, h, w);
  const PixelIndex p01 = fold_pixel(i0, j0 + 1, h, w);
  const PixelIndex p10 = fold_pixel(i0 + 1, j0, h, w);
  const PixelIndex p11 = fold_pixel(i0 + 1, j0 + 1, h, w);
  for (int c = 0; c < nc; ++c) {
    const double top = (1.0 - fj) * img.at(p00.i, p00.j, c) + fj * img.at(p01.i, p01.j, c);
    const double bot = (1.0 - fj) * img.at(p10.i, p10.j, c) + fj * img.at(p11.i, p11.j, c);
    out[c] = static_cast<float>((1.0 - fi) * top + fi * bot);
  }
}

std::vector<float> bilinear_sample(const FloatRaster& img, double i, double j) {
  std::vector<float> out(img.channels());
  bilinear_sample(img, i, j, out);
  return out;
}

ErpImage rotate_erp(const ErpImage& img, const Rotation& r) {
  require_erp_aspect(img.height(), img.width(), "rotate_erp");
  const int h = img.height();
  const int w = img.width();
  ErpImage out(h, w, img.channels());
  const Eigen::Matrix3d rt = r.matrix().transpose();
  parallel_for(static_cast<std::size_t>(h), [&](std::size_t row) {
    const int i = static_cast<int>(row);
    for (int j = 0; j < w; ++j) {
      const SphereDir src = rt * pixel_to_dir(i, j, h, w);
      const PixelCoord q = dir_to_pixel(src.normalized(), h, w);
      bilinear_sample(img, q.i, q.j, out.pixel(i, j));
    }
  });
  return out;
}

FloatRaster circular_pad(const FloatRaster& img, int p) {
  const int w = img.width();
  if (p <= 0 || p > w / 2) {
    throw DomainError("circular_pad: padding " + std::to_string(p) + " outside (0, W/2] for W=" + std::to_string(w));
  }
  FloatRaster out(img.height(), w + 2 * p, img.channels());
  for (int i = 0; i < img.height(); ++i) {
    for (int jo = 0; jo < w + 2 * p; ++jo) {
      const int js = wrap_index(jo - p, w);
      for (int c = 0; c < img.channels(); ++c) out.at(i, jo, c) = img.at(i, js, c);
    }
  }
  return out;
}

FloatRaster crop_pad(const FloatRaster& padded, int p) {
  const int w = padded.width() - 2 * p;
  if (p <= 0 || w <= 0 || p > w / 2) {
    throw DomainError("crop_pad: padding " + std::to_string(p) + " inconsistent with width " +
                      std::to_string(padded.width()));
  }
  FloatRaster out(padded.height(), w, padded.channels());
  for (int i = 0; i < padded.height(); ++i) {
    for (int j = 0; j < w; ++j) {
      for (int c = 0; c < padded.channels(); ++c) out.at(i, j, c) = padded.at(i, j + p, c);
    }
  }
  return out;
}

ErpImage circular_pad(const ErpImage& img, int p) {
  return ErpImage(circular_pad(static_cast<const FloatRaster&>(img), p));
}

ErpImage crop_pad(const ErpImage& padded, int p) {
  return ErpImage(crop_pad(static_cast<const FloatRaster&>(padded), p));
}

}  // namespace erpm
