#include "erpmotion/decouple.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "erpmotion/erp_ops.hpp"
#include "erpmotion/error.hpp"
#include "erpmotion/parallel.hpp"

namespace erpm {

RotationTrack::RotationTrack(std::vector<Rotation> rotations) : r_(std::move(rotations)) {
  if (r_.empty()) throw DomainError("RotationTrack needs at least one entry");
  if (r_.front().matrix() != Eigen::Matrix3d::Identity()) {
    throw DomainError("RotationTrack: first rotation must be the identity");
  }
}

RotationFlow rotation_flow(const Rotation& r, int height, int width) {
  require_erp_aspect(height, width, "rotation_flow");
  const Eigen::Matrix3d rt = r.matrix().transpose();
  VectorField3 sph(height, width);
  parallel_for(static_cast<std::size_t>(height), [&](std::size_t row) {
    const int i = static_cast<int>(row);
    for (int j = 0; j < width; ++j) {
      const SphereDir x = pixel_to_dir(i, j, height, width);
      sph.at(i, j) = rt * x - x;
    }
  });
  FlowField pixel = flow_from_targets(height, width, [&](int i, int j) {
    return SphereDir(rt * pixel_to_dir(i, j, height, width));
  });
  return {SphericalFlow(std::move(sph)), std::move(pixel)};
}

VectorField3 decompose_flow(const SphericalFlow& f, const Rotation& r) {
  const int h = f.height();
  const int w = f.width();
  const Eigen::Matrix3d rt = r.matrix().transpose();
  VectorField3 out(h, w);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      const SphereDir x = pixel_to_dir(i, j, h, w);
      out.at(i, j) = f.at(i, j) - (rt * x - x);
    }
  }
  return out;
}

VectorField3 recombine_flow(const VectorField3& derotated, const Rotation& r) {
  const int h = derotated.height();
  const int w = derotated.width();
  require_erp_aspect(h, w, "recombine_flow");
  const Eigen::Matrix3d rt = r.matrix().transpose();
  VectorField3 out(h, w);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      const SphereDir x = pixel_to_dir(i, j, h, w);
      out.at(i, j) = derotated.at(i, j) + (rt * x - x);
    }
  }
  return out;
}

namespace {

struct Correspondences {
  std::vector<Eigen::Vector3d> x;
  std::vector<Eigen::Vector3d> y;
  std::vector<double> w;
};

Rotation solve_weighted_procrustes(const Correspondences& c, const std::vector<double>& weights) {
  Eigen::Matrix3d b = Eigen::Matrix3d::Zero();
  for (std::size_t k = 0; k < c.x.size(); ++k) b += weights[k] * c.x[k] * c.y[k].transpose();
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(b, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d s = svd.singularValues();
  if (!(s(0) > 0.0) || s(1) <= 1e-9 * s(0)) throw EstimationError("estimate_rotation: correspondence matrix is rank deficient");
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) d(2, 2) = -1.0;
  return Rotation::nearest(svd.matrixU() * d * svd.matrixV().transpose());
}

}  // namespace

Rotation estimate_rotation(const FlowField& f, const RotationEstimateParams& params) {
  const int h = f.height();
  const int w = f.width();
  require_erp_aspect(h, w, "estimate_rotation");
  if (params.stride <= 0 || params.irls_rounds < 0 || !(params.huber_scale > 0.0)) {
    throw ConfigError("estimate_rotation: invalid parameters");
  }
  Correspondences c;
  for (int i = params.stride / 2; i < h; i += params.stride) {
    const double weight = std::cos(pixel_latitude(i, h));
    for (int j = params.stride / 2; j < w; j += params.stride) {
      const double du = f.du(i, j);
      const double dv = f.dv(i, j);
      if (!std::isfinite(du) || !std::isfinite(dv)) continue;
      c.x.push_back(pixel_to_dir(i, j, h, w));
      c.y.push_back(pixel_to_dir(i + dv, j + du, h, w));
      c.w.push_back(weight);
    }
  }
  if (c.x.size() < 3) throw EstimationError("estimate_rotation: fewer than 3 valid samples");

  Rotation r = solve_weighted_procrustes(c, c.w);
  std::vector<double> residual(c.x.size());
  std::vector<double> weights(c.x.size());
  for (int round = 0; round < params.irls_rounds; ++round) {
    const Eigen::Matrix3d rt = r.matrix().transpose();
    for (std::size_t k = 0; k < c.x.size(); ++k) residual[k] = (rt * c.x[k] - c.y[k]).norm();
    std::vector<double> sorted = residual;
    const auto mid = sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2);
    std::nth_element(sorted.begin(), mid, sorted.end());
    const double delta = params.huber_scale * *mid;
    if (!(delta > 1e-14)) break;
    for (std::size_t k = 0; k < c.x.size(); ++k) {
      weights[k] = c.w[k] * (residual[k] <= delta ? 1.0 : delta / residual[k]);
    }
    r = solve_weighted_procrustes(c, weights);
  }
  return r;
}

RotationTrack accumulate(const std::vector<Rotation>& deltas) {
  std::vector<Rotation> track{Rotation::identity()};
  track.reserve(deltas.size() + 1);
  for (const Rotation& d : deltas) track.push_back(Rotation::nearest((d * track.back()).matrix()));
  return RotationTrack(std::move(track));
}

namespace {

void require_same_length(std::size_t frames, std::size_t track, const char* what) {
  if (frames != track) {
    throw ShapeError(std::string(what) + ": " + std::to_string(frames) + " frames but track has " +
                     std::to_string(track) + " rotations");
  }
}

}  // namespace

std::vector<ErpImage> derotate_frames(const std::vector<ErpImage>& frames, const RotationTrack& track) {
  require_same_length(frames.size(), track.size(), "derotate_frames");
  std::vector<ErpImage> out;
  out.reserve(frames.size());
  for (std::size_t t = 0; t < frames.size(); ++t) out.push_back(rotate_erp(frames[t], track[t].transpose()));
  return out;
}

std::vector<ErpImage> rerotate_frames(const std::vector<ErpImage>& frames, const RotationTrack& track) {
  require_same_length(frames.size(), track.size(), "rerotate_frames");
  std::vector<ErpImage> out;
  out.reserve(frames.size());
  for (std::size_t t = 0; t < frames.size(); ++t) out.push_back(rotate_erp(frames[t], track[t]));
  return out;
}

DecoupleResult decouple_pipeline(const std::vector<ErpImage>& frames, const DecoupleParams& params) {
  if (frames.size() < 2) throw ShapeError("decouple_pipeline: needs at least 2 frames");
  DecoupleResult result;
  std::vector<Rotation> deltas;
  for (std::size_t t = 0; t + 1 < frames.size(); ++t) {
    try {
      result.input_flows.push_back(estimate_flow(frames[t], frames[t + 1], params.flow));
      deltas.push_back(increment_from_flow_rotation(estimate_rotation(result.input_flows.back(), params.rotation)));
    } catch (const EstimationError& e) {
      throw EstimationError("frame pair " + std::to_string(t) + "->" + std::to_string(t + 1) + ": " + e.what());
    } catch (const ShapeError& e) {
      throw ShapeError("frame pair " + std::to_string(t) + "->" + std::to_string(t + 1) + ": " + e.what());
    }
  }
  result.track = accumulate(deltas);
  result.derotated = derotate_frames(frames, result.track);
  for (std::size_t t = 0; t + 1 < frames.size(); ++t) {
    result.derotated_flows.push_back(estimate_flow(result.derotated[t], result.derotated[t + 1], params.flow));
  }
  return result;
}

}  // namespace erpm
