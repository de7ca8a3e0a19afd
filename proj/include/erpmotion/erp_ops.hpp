#pragma once

#include <span>
#include <vector>

#include "erpmotion/raster.hpp"
#include "erpmotion/rotation.hpp"

namespace erpm {

// Maps an integer pixel outside the grid back onto it by repeated use of the
// spherical boundary remap: longitude wraps modulo W, rows reflect across the
// poles with a W/2 longitude shift per reflection. Unlike remap_pixel this
// accepts any overshoot.
PixelIndex fold_pixel(int i, int j, int height, int width);

// Bilinear interpolation between the four surrounding pixel centers; integer
// coordinates are pixel centers. Neighbors outside the grid go through
// fold_pixel. Coordinates within 1e-6 px of an integer are snapped to it.
void bilinear_sample(const FloatRaster& img, double i, double j, std::span<float> out);
std::vector<float> bilinear_sample(const FloatRaster& img, double i, double j);

// out(p) = Bilinear(img, R^T * dir(p)) for every output pixel p.
// Requires W == 2H. Parallel over rows.
ErpImage rotate_erp(const ErpImage& img, const Rotation& r);

// Adds p columns on each side copied from the opposite edge: the left pad
// holds columns [W - p, W), the right pad columns [0, p). Requires 0 < p <= W/2.
FloatRaster circular_pad(const FloatRaster& img, int p);
FloatRaster crop_pad(const FloatRaster& padded, int p);
ErpImage circular_pad(const ErpImage& img, int p);
ErpImage crop_pad(const ErpImage& padded, int p);

// Padding widths used on pixel rasters and latent rasters respectively.
inline constexpr int kEncoderPadding = 8;
inline constexpr int kLatentPadding = 1;

}  // namespace erpm
