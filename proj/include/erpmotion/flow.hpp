#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "erpmotion/raster.hpp"

namespace erpm {

// Dense pixel displacement. du is horizontal (+ right), dv vertical
// (+ down). Content of frame a at p sits at p + (dv, du) in frame b.
class FlowField {
 public:
  FlowField() = default;
  FlowField(int height, int width);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t pixel_count() const { return du_.size(); }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * width_ + j; }

  float& du(int i, int j) { return du_[index(i, j)]; }
  float& dv(int i, int j) { return dv_[index(i, j)]; }
  float du(int i, int j) const { return du_[index(i, j)]; }
  float dv(int i, int j) const { return dv_[index(i, j)]; }

  std::vector<float>& du_values() { return du_; }
  std::vector<float>& dv_values() { return dv_; }
  const std::vector<float>& du_values() const { return du_; }
  const std::vector<float>& dv_values() const { return dv_; }

  bool same_shape(const FlowField& o) const { return height_ == o.height_ && width_ == o.width_; }
  bool all_finite() const;
  bool operator==(const FlowField&) const = default;

  static FlowField uniform(int height, int width, float du, float dv);

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<float> du_;
  std::vector<float> dv_;
};

// Per-pixel 3-vectors on the ERP grid.
class VectorField3 {
 public:
  VectorField3() = default;
  VectorField3(int height, int width) : height_(height), width_(width), v_(static_cast<std::size_t>(height) * width, Eigen::Vector3d::Zero()) {}

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t pixel_count() const { return v_.size(); }
  Eigen::Vector3d& at(int i, int j) { return v_[static_cast<std::size_t>(i) * width_ + j]; }
  const Eigen::Vector3d& at(int i, int j) const { return v_[static_cast<std::size_t>(i) * width_ + j]; }
  std::vector<Eigen::Vector3d>& values() { return v_; }
  const std::vector<Eigen::Vector3d>& values() const { return v_; }
  bool same_shape(const VectorField3& o) const { return height_ == o.height_ && width_ == o.width_; }

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<Eigen::Vector3d> v_;
};

// Displacement on the unit sphere, f = x' - x, whose endpoint x + f lies on
// the sphere at every pixel. Construction checks that to kEndpointTolerance.
class SphericalFlow {
 public:
  static constexpr double kEndpointTolerance = 1e-6;

  SphericalFlow() = default;
  // Throws ShapeError on non-ERP aspect and DomainError on off-sphere endpoints.
  explicit SphericalFlow(VectorField3 f);

  int height() const { return f_.height(); }
  int width() const { return f_.width(); }
  const Eigen::Vector3d& at(int i, int j) const { return f_.at(i, j); }
  const VectorField3& field() const { return f_; }

 private:
  VectorField3 f_;
};

SphericalFlow pixel_to_spherical(const FlowField& f);
FlowField spherical_to_pixel(const SphericalFlow& f);

// Pixel flow that moves every x to target(x), with the column difference
// taken on the shortest wrap. Used by analytic flows.
template <typename TargetFn>
FlowField flow_from_targets(int height, int width, TargetFn&& target);

struct EpeResult {
  double mean = 0.0;
  std::vector<float> per_pixel;
};

// Mean end-point error; the du difference is wrapped into (-W/2, W/2].
EpeResult epe_map(const FlowField& est, const FlowField& ref);
double epe(const FlowField& est, const FlowField& ref);

double mean_magnitude(const FlowField& f);

// Middlebury color wheel. Saturation scales with magnitude / max_mag, where
// max_mag defaults to the 99th percentile of magnitudes. Zero flow is white.
ErpImage flow_to_color(const FlowField& f, std::optional<double> max_mag = std::nullopt);

// Middlebury .flo: "PIEH", i32 W, i32 H, then interleaved (du, dv) float32 LE.
FlowField read_flo(const std::filesystem::path& path);
void write_flo(const FlowField& f, const std::filesystem::path& path);

}  // namespace erpm

#include "erpmotion/flow_inl.hpp"
