#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "erpmotion/decouple.hpp"
#include "erpmotion/erp_ops.hpp"
#include "erpmotion/error.hpp"
#include "erpmotion/geometry.hpp"
#include "erpmotion/metrics.hpp"
#include "support.hpp"

using namespace erpm;

namespace {

Rotation random_rotation(std::mt19937_64& gen, double max_deg) {
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> u(0.0, max_deg);
  Eigen::Vector3d axis(n(gen), n(gen), n(gen));
  return Rotation::from_axis_angle(axis, u(gen));
}

}  // namespace

TEST(RotationFlow, IdentityIsZero) {
  const RotationFlow f = rotation_flow(Rotation::identity(), 32, 64);
  EXPECT_EQ(f.pixel, FlowField(32, 64));
  for (const auto& v : f.spherical.field().values()) EXPECT_EQ(v.norm(), 0.0);
}

TEST(RotationFlow, YawIsUniformColumnShift) {
  const RotationFlow f = rotation_flow(rotation_from_euler(3.75, 0, 0), 480, 960);
  for (std::size_t k = 0; k < f.pixel.pixel_count(); ++k) {
    ASSERT_NEAR(f.pixel.du_values()[k], -10.0, 1e-3);
    ASSERT_NEAR(f.pixel.dv_values()[k], 0.0, 1e-3);
  }
}

TEST(RotationFlow, MagnitudeFollowsChordIdentity) {
  const Eigen::Vector3d axis = Eigen::Vector3d(0.3, 0.8, -0.5).normalized();
  const double alpha = 17.0;
  const RotationFlow f = rotation_flow(Rotation::from_axis_angle(axis, alpha), 60, 120);
  for (int i = 0; i < 60; i += 7) {
    for (int j = 0; j < 120; j += 5) {
      const SphereDir x = pixel_to_dir(i, j, 60, 120);
      const double psi = std::acos(std::clamp(x.dot(axis), -1.0, 1.0));
      const double expect = 2.0 * std::sin(alpha / 2 * std::numbers::pi / 180) * std::sin(psi);
      ASSERT_NEAR(f.spherical.at(i, j).norm(), expect, 1e-9);
    }
  }
}

TEST(RotationFlow, PixelFlowMovesContentAlongRotation) {
  // Content at p in frame t sits at p + flow in rotate_erp(frame t, E^T).
  const ErpImage img = test::blob_image(120, 240, 5);
  const Rotation e = rotation_from_euler(4, 2, -1);
  const ErpImage moved = rotate_erp(img, e.transpose());
  const FlowField f = rotation_flow(e, 120, 240).pixel;
  double err = 0;
  int n = 0;
  for (int i = 20; i < 100; i += 3) {
    for (int j = 0; j < 240; j += 3) {
      const auto v = bilinear_sample(moved, i + f.dv(i, j), j + f.du(i, j));
      err += std::abs(v[0] - img.at(i, j, 0));
      ++n;
    }
  }
  EXPECT_LT(err / n, 0.01);
}

TEST(Decompose, ExactAlgebra) {
  const Rotation r = rotation_from_euler(8, -3, 5);
  const RotationFlow fr = rotation_flow(r, 24, 48);
  const VectorField3 d = decompose_flow(fr.spherical, r);
  for (const auto& v : d.values()) ASSERT_LT(v.cwiseAbs().maxCoeff(), 1e-12);

  const SphericalFlow f = pixel_to_spherical(test::random_flow(24, 48, 3, 4.0f));
  const VectorField3 same = decompose_flow(f, Rotation::identity());
  for (std::size_t k = 0; k < same.pixel_count(); ++k) ASSERT_EQ(same.values()[k], f.field().values()[k]);

  const VectorField3 back = recombine_flow(decompose_flow(f, r), r);
  for (std::size_t k = 0; k < back.pixel_count(); ++k) {
    ASSERT_LT((back.values()[k] - f.field().values()[k]).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(EstimateRotation, ZeroFlowIsIdentity) {
  EXPECT_LT(estimate_rotation(FlowField(64, 128)).angle_deg(), 1e-6);
}

TEST(EstimateRotation, RecoversAnalyticYaw) {
  const Rotation r = rotation_from_euler(5, 0, 0);
  EXPECT_LT(geodesic_distance(estimate_rotation(rotation_flow(r, 240, 480).pixel), r), 0.1);
}

TEST(EstimateRotation, RecoversRandomRotations) {
  std::mt19937_64 gen(42);
  for (int k = 0; k < 20; ++k) {
    const Rotation r = random_rotation(gen, 10.0);
    ASSERT_LT(geodesic_distance(estimate_rotation(rotation_flow(r, 120, 240).pixel), r), 0.1);
  }
}

TEST(EstimateRotation, RobustToCoherentOutliers) {
  const Rotation r = rotation_from_euler(6, 2, -3);
  FlowField f = rotation_flow(r, 240, 480).pixel;
  // 10% of the pixels: a block moving 15 px right and 6 px down.
  for (int i = 60; i < 108; ++i) {
    for (int j = 100; j < 340; ++j) {
      f.du(i, j) += 15.0f;
      f.dv(i, j) += 6.0f;
    }
  }
  EXPECT_LT(geodesic_distance(estimate_rotation(f), r), 0.5);
}

TEST(EstimateRotation, DegenerateInputsThrow) {
  EXPECT_THROW(estimate_rotation(FlowField(2, 4)), EstimationError);
  EXPECT_THROW(estimate_rotation(FlowField(10, 30)), ShapeError);
}

TEST(Accumulate, IdentityDeltas) {
  const RotationTrack t = accumulate(std::vector<Rotation>(5));
  ASSERT_EQ(t.size(), 6u);
  for (const auto& r : t.rotations()) EXPECT_EQ(r.matrix(), Eigen::Matrix3d::Identity());
}

TEST(Accumulate, ConstantYawAddsUp) {
  const RotationTrack t = accumulate(std::vector<Rotation>(9, rotation_from_euler(2, 0, 0)));
  ASSERT_EQ(t.size(), 10u);
  EXPECT_LT(geodesic_distance(t[9], rotation_from_euler(18, 0, 0)), 1e-6);
}

TEST(Accumulate, MatchesRotateErpComposition) {
  // frame_{t+1} = rotate_erp(frame_t, delta_t) must equal rotate_erp(frame_0, R_{t+1}).
  const ErpImage img = test::blob_image(96, 192, 6);
  const std::vector<Rotation> deltas{rotation_from_euler(5, 3, 0), rotation_from_euler(-2, 4, 6)};
  const RotationTrack track = accumulate(deltas);
  const ErpImage stepwise = rotate_erp(rotate_erp(img, deltas[0]), deltas[1]);
  EXPECT_GE(psnr(stepwise, rotate_erp(img, track[2])), 35.0);
  const Rotation wrong = deltas[0] * deltas[1];
  EXPECT_GT(geodesic_distance(wrong, track[2]), 0.1);
}

TEST(Accumulate, LongRandomWalkStaysOrthonormal) {
  std::mt19937_64 gen(7);
  std::vector<Rotation> deltas;
  for (int k = 0; k < 10000; ++k) deltas.push_back(random_rotation(gen, 5.0));
  const RotationTrack t = accumulate(deltas);
  for (std::size_t k = 0; k < t.size(); k += 97) {
    const Eigen::Matrix3d& m = t[k].matrix();
    ASSERT_LT((m.transpose() * m - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-9);
  }
  const Eigen::Matrix3d& last = t[t.size() - 1].matrix();
  EXPECT_LT((last.transpose() * last - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(RotationTrack, FirstEntryMustBeIdentity) {
  EXPECT_THROW(RotationTrack({rotation_from_euler(1, 0, 0)}), DomainError);
}

TEST(Derotate, IdentityTrackIsUnchanged) {
  std::vector<ErpImage> frames{test::random_image(16, 32, 3, 1), test::random_image(16, 32, 3, 2)};
  const RotationTrack id(std::vector<Rotation>(2));
  EXPECT_EQ(derotate_frames(frames, id), frames);
  EXPECT_EQ(rerotate_frames(frames, id), frames);
  EXPECT_THROW(derotate_frames(frames, RotationTrack()), ShapeError);
}

TEST(Derotate, IntegerYawRoundTripIsExact) {
  std::vector<ErpImage> frames{test::random_image(24, 48, 3, 3), test::random_image(24, 48, 3, 4)};
  const RotationTrack t({Rotation::identity(), rotation_from_euler(30, 0, 0)});
  const auto d = derotate_frames(frames, t);
  EXPECT_EQ(d[0], frames[0]);
  EXPECT_EQ(d[1], roll_columns(frames[1], -4));
  EXPECT_EQ(rerotate_frames(d, t), frames);
}

TEST(Derotate, RerotateRoundTripOnBandLimitedFrames) {
  const SceneSpec s = test::yaw_scene(240, 1, 0.0);
  std::vector<ErpImage> frames{render_frame(s, 0), test::blob_image(240, 480, 9)};
  const RotationTrack t({Rotation::identity(), rotation_from_euler(11, 7, -4)});
  const auto back = rerotate_frames(derotate_frames(frames, t), t);
  EXPECT_EQ(back[0], frames[0]);
  EXPECT_GE(psnr(back[1], frames[1]), 33.0);
}

TEST(DecouplePipeline, StaticVideo) {
  const ErpImage img = test::blob_image(64, 128, 12);
  const DecoupleResult r = decouple_pipeline({img, img, img});
  ASSERT_EQ(r.track.size(), 3u);
  for (const auto& rot : r.track.rotations()) EXPECT_LT(rot.angle_deg(), 1e-6);
  for (const auto& f : r.derotated_flows) EXPECT_LT(mean_magnitude(f), 0.3);
  EXPECT_THROW(decouple_pipeline({img}), ShapeError);
}

TEST(DecouplePipeline, SmallRotationVideo) {
  SceneSpec s = test::yaw_scene(120, 4, 0.0);
  std::vector<Rotation> rs;
  for (int t = 0; t < 4; ++t) rs.push_back(t == 0 ? Rotation::identity() : rotation_from_euler(3.0 * t, 1.0 * t, 0.5 * t));
  s.camera = RotationTrack(rs);
  const DecoupleResult r = decouple_pipeline(render(s));
  for (int t = 0; t < 4; ++t) EXPECT_LT(geodesic_distance(r.track[t], rs[t]), 0.5) << t;
}

TEST(TrackIo, RoundTrip) {
  test::TempDir dir("track");
  std::mt19937_64 gen(5);
  std::vector<Rotation> rs{Rotation::identity()};
  for (int k = 0; k < 6; ++k) rs.push_back(random_rotation(gen, 90.0));
  write_track(RotationTrack(rs), 480, 960, dir / "t.json");
  const LoadedTrack t = read_track(dir / "t.json");
  EXPECT_EQ(t.height, 480);
  EXPECT_EQ(t.width, 960);
  ASSERT_EQ(t.track.size(), rs.size());
  for (std::size_t k = 0; k < rs.size(); ++k) EXPECT_LT(geodesic_distance(t.track[k], rs[k]), 1e-7);
  EXPECT_EQ(t.track[0].matrix(), Eigen::Matrix3d::Identity());
}

TEST(TrackIo, RejectsMalformed) {
  test::TempDir dir("trackbad");
  std::ofstream(dir / "a.json") << R"({"height": 4, "width": 8, "frames": 2, "quaternions": [[1,0,0,0]]})";
  EXPECT_THROW(read_track(dir / "a.json"), FormatError);
  std::ofstream(dir / "b.json") << "{";
  EXPECT_THROW(read_track(dir / "b.json"), FormatError);
}
