#pragma once

#include <Eigen/Core>

namespace erpm {

// Unit vector on the viewing sphere. +y is the north pole (row 0), +z is
// longitude 0 (the image column center), +x is longitude +90 degrees.
using SphereDir = Eigen::Vector3d;

// Continuous pixel position: i is the row from the top, j the column from the
// left. Pixel (i, j) covers [i, i + 1) x [j, j + 1); its center is at
// (i + 0.5, j + 0.5) in normalized units, which is where pixel_to_dir
// evaluates integer coordinates.
struct PixelCoord {
  double i = 0.0;
  double j = 0.0;
};

struct PixelIndex {
  int i = 0;
  int j = 0;
  bool operator==(const PixelIndex&) const = default;
};

// Longitude / latitude in radians of a continuous pixel position.
double pixel_longitude(double j, int width);
double pixel_latitude(double i, int height);

// Direction of a continuous pixel position. Accepts any real (i, j); rows
// beyond the poles continue over them. Throws ShapeError unless W == 2H.
SphereDir pixel_to_dir(double i, double j, int height, int width);
inline SphereDir pixel_to_dir(PixelCoord p, int height, int width) { return pixel_to_dir(p.i, p.j, height, width); }

// Inverse of pixel_to_dir on j in [-0.5, W - 0.5), i in [-0.5, H - 0.5].
// At the poles the longitude is undefined and j = W/2 - 0.5 is returned.
// Throws DomainError when |d| deviates from 1 by more than kUnitTolerance.
PixelCoord dir_to_pixel(const SphereDir& d, int height, int width);

inline constexpr double kUnitTolerance = 1e-6;

// Boundary remap for integer pixel targets on the ERP grid:
//   row:    -i            if i < 0
//           i             if 0 <= i < H
//           2(H - 1) - i  if i >= H
//   column: (j + W/2) mod W  if the row was reflected, else j mod W.
// Only a single reflection is supported: rows must satisfy
// -(H - 1) <= i <= 2(H - 1); anything beyond throws DomainError.
PixelIndex remap_pixel(int i, int j, int height, int width);

// Non-negative remainder.
inline int wrap_index(int j, int n) {
  const int r = j % n;
  return r < 0 ? r + n : r;
}

// Shortest signed column difference, wrapped into (-W/2, W/2].
double wrap_column_delta(double dj, int width);

}  // namespace erpm
