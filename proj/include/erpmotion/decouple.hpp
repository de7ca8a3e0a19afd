#pragma once

#include <filesystem>
#include <vector>

#include "erpmotion/flow.hpp"
#include "erpmotion/flow_estimator.hpp"
#include "erpmotion/raster.hpp"
#include "erpmotion/rotation.hpp"

namespace erpm {

// Camera rotations R_t relative to frame 0, in the rotate_erp convention:
// frame t ~ rotate_erp(frame 0, R_t). R_0 is the identity.
class RotationTrack {
 public:
  RotationTrack() : r_{Rotation::identity()} {}
  // Throws DomainError unless the first entry is exactly the identity.
  explicit RotationTrack(std::vector<Rotation> rotations);

  std::size_t size() const { return r_.size(); }
  const Rotation& operator[](std::size_t t) const { return r_[t]; }
  const std::vector<Rotation>& rotations() const { return r_; }

 private:
  std::vector<Rotation> r_;
};

struct RotationFlow {
  SphericalFlow spherical;
  FlowField pixel;
};

// f_r(x) = R^T x - x on the sphere, plus the equivalent pixel flow with the
// shortest wrapped du. Requires W == 2H.
RotationFlow rotation_flow(const Rotation& r, int height, int width);

// f_d = f - f_r(R). The residual is an arbitrary 3-vector field (its
// endpoints are generally off the sphere).
VectorField3 decompose_flow(const SphericalFlow& f, const Rotation& r);
// f_d + f_r(R); inverse of decompose_flow.
VectorField3 recombine_flow(const VectorField3& derotated, const Rotation& r);

struct RotationEstimateParams {
  int stride = 4;
  int irls_rounds = 3;
  // Huber threshold as a multiple of the median residual.
  double huber_scale = 2.0;
};

// Rotation R minimizing sum_i w_i |R^T x_i - y_i|^2 over flow correspondences
// x_i = dir(p_i), y_i = dir(p_i + flow(p_i)) sampled on a stride grid with
// cos-latitude weights, solved in closed form from the SVD of
// B = sum_i w_i x_i y_i^T with determinant correction, then refit with Huber
// weights. So flow ~ rotation_flow(R).pixel.
// Throws EstimationError on fewer than 3 samples or rank-deficient B.
Rotation estimate_rotation(const FlowField& f, const RotationEstimateParams& params = {});

// R_{t+1} = delta_t * R_t with polar re-orthonormalization after every step.
// delta_t is the increment with frame t+1 ~ rotate_erp(frame t, delta_t); it
// multiplies on the left because rotate_erp(rotate_erp(I, A), B) equals
// rotate_erp(I, B * A).
RotationTrack accumulate(const std::vector<Rotation>& deltas);

// Frame-to-frame increment from a rotation estimated on the flow t -> t+1.
inline Rotation increment_from_flow_rotation(const Rotation& estimated) { return estimated.transpose(); }

// Frame t -> rotate_erp(frame t, R_t^T). Frame 0 passes through unchanged.
std::vector<ErpImage> derotate_frames(const std::vector<ErpImage>& frames, const RotationTrack& track);
// Frame t -> rotate_erp(frame t, R_t).
std::vector<ErpImage> rerotate_frames(const std::vector<ErpImage>& frames, const RotationTrack& track);

struct DecoupleParams {
  BlockMatchParams flow;
  RotationEstimateParams rotation;
};

struct DecoupleResult {
  std::vector<ErpImage> derotated;
  RotationTrack track;
  std::vector<FlowField> derotated_flows;
  // Flows of the input video, kept for diagnostics.
  std::vector<FlowField> input_flows;
};

// estimate_flow per pair -> estimate_rotation -> accumulate ->
// derotate_frames -> estimate_flow on the derotated frames.
DecoupleResult decouple_pipeline(const std::vector<ErpImage>& frames, const DecoupleParams& params = {});

// JSON: {"height": H, "width": W, "frames": T, "quaternions": [[w,x,y,z], ...]}.
void write_track(const RotationTrack& track, int height, int width, const std::filesystem::path& path);
struct LoadedTrack {
  RotationTrack track;
  int height = 0;
  int width = 0;
};
// Quaternions are normalized and re-orthonormalized on load.
LoadedTrack read_track(const std::filesystem::path& path);

}  // namespace erpm
