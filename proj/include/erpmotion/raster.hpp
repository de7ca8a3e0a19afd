#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "erpmotion/error.hpp"

namespace erpm {

// Dense H x W x C raster, row-major with interleaved channels.
template <typename T>
class Raster {
 public:
  Raster() = default;
  Raster(int height, int width, int channels, T fill = T{})
      : height_(height), width_(width), channels_(channels) {
    if (height <= 0 || width <= 0 || channels <= 0) {
      throw ShapeError("raster dimensions must be positive");
    }
    data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
  }

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(height_) * width_; }
  std::size_t size() const { return data_.size(); }

  std::size_t index(int i, int j, int c = 0) const {
    return (static_cast<std::size_t>(i) * width_ + j) * channels_ + c;
  }

  T& at(int i, int j, int c = 0) { return data_[index(i, j, c)]; }
  const T& at(int i, int j, int c = 0) const { return data_[index(i, j, c)]; }

  std::span<T> pixel(int i, int j) { return {data_.data() + index(i, j), static_cast<std::size_t>(channels_)}; }
  std::span<const T> pixel(int i, int j) const {
    return {data_.data() + index(i, j), static_cast<std::size_t>(channels_)};
  }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  bool same_shape(const Raster& other) const {
    return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
  }

  bool operator==(const Raster& other) const = default;

 private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<T> data_;
};

using FloatRaster = Raster<float>;

// Panorama frame with intensities in [0, 1]. H >= 2, W >= 2, C in {1, 3}.
// Spherical operations additionally require W == 2H (see require_erp_aspect).
class ErpImage : public FloatRaster {
 public:
  ErpImage() = default;
  ErpImage(int height, int width, int channels, float fill = 0.0f);
  explicit ErpImage(FloatRaster raster);

  bool is_erp_aspect() const { return width() == 2 * height(); }
};

// Throws ShapeError unless width == 2 * height.
void require_erp_aspect(int height, int width, const char* what);

// Grayscale copy (0.299 / 0.587 / 0.114 weights for three channels).
ErpImage to_gray(const ErpImage& img);

// Bilinear resize to an arbitrary size, pixel-center aligned, columns wrap.
ErpImage resize_bilinear(const ErpImage& img, int height, int width);

// Resize so that the smaller dimension equals min_dim, preserving aspect.
ErpImage resize_min_dim(const ErpImage& img, int min_dim);

// Cyclic column shift: out(i, j) = in(i, j - shift mod W).
template <typename T>
Raster<T> roll_columns(const Raster<T>& in, int shift) {
  Raster<T> out = in;
  const int w = in.width();
  const int s = ((shift % w) + w) % w;
  for (int i = 0; i < in.height(); ++i) {
    for (int j = 0; j < w; ++j) {
      const int jd = (j + s) % w;
      for (int c = 0; c < in.channels(); ++c) out.at(i, jd, c) = in.at(i, j, c);
    }
  }
  return out;
}

inline ErpImage roll_columns(const ErpImage& in, int shift) {
  return ErpImage(roll_columns(static_cast<const FloatRaster&>(in), shift));
}

}  // namespace erpm
