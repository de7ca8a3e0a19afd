#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include <json.hpp>

#include "erpmotion/decouple.hpp"
#include "erpmotion/flow.hpp"
#include "erpmotion/geometry.hpp"
#include "erpmotion/raster.hpp"
#include "erpmotion/rotation.hpp"

namespace erpm {

enum class TextureKind { LatLongGrad, Checker, Blobs };

struct TextureSpec {
  TextureKind kind = TextureKind::Blobs;
  // Checker: n cells of 180/n degrees along latitude, 2n along longitude.
  int checker_n = 8;
  // Blobs: count Gaussian bumps of angular std-dev sigma_deg.
  int blob_count = 600;
  double blob_sigma_deg = 3.0;
};

// Rigid disc moving along the great circle through its center in the given
// heading (0 = east, 90 = north).
struct DiscSpec {
  double lon_deg = 0.0;
  double lat_deg = 0.0;
  double radius_deg = 20.0;
  double speed_deg_per_frame = 1.0;
  double heading_deg = 0.0;
  std::array<double, 3> color{0.9, 0.3, 0.2};
  // A textured disc carries a pattern that moves with it; otherwise flat color.
  bool textured = true;

  SphereDir center() const;
  // Motion over `frames` frames as a rotation of world directions.
  Rotation motion(double frames) const;
};

struct SceneSpec {
  std::uint64_t seed = 0;
  int height = 480;
  int width = 960;
  int frames = 25;
  int channels = 3;
  TextureSpec texture;
  std::optional<DiscSpec> disc;
  RotationTrack camera;  // size == frames

  // Throws ConfigError on W != 2H, T < 1, camera length mismatch, bad disc radius.
  void validate() const;
};

// Direction-space texture, deterministic in (spec, seed).
class Texture {
 public:
  virtual ~Texture() = default;
  virtual std::array<double, 3> eval(const SphereDir& d) const = 0;
};

std::unique_ptr<Texture> make_texture(const TextureSpec& spec, std::uint64_t seed);

// Blob parameters drawn for (spec, seed); exposed for independent evaluation.
struct Blob {
  SphereDir center;
  std::array<double, 3> amplitude;
};
std::vector<Blob> draw_blobs(const TextureSpec& spec, std::uint64_t seed);
// Chord-distance cutoff beyond which a blob contributes nothing.
double blob_cutoff_chord2(double sigma_deg);

// frame t, pixel p = texture(R_t^T dir(p)), disc composited where the angle
// between R_t^T dir(p) and the disc center at frame t is below its radius.
std::vector<ErpImage> render(const SceneSpec& spec);
ErpImage render_frame(const SceneSpec& spec, int t);

// Ground-truth flow t -> t+1: the camera increment R_{t+1} R_t^T applied to
// every direction, with disc pixels additionally advected by the disc motion.
std::vector<FlowField> gt_flows(const SceneSpec& spec);

// Pixels covered by the disc in frame t (all false without a disc).
std::vector<bool> disc_mask(const SceneSpec& spec, int t);

// JSON scene description; see README for the schema.
SceneSpec scene_from_json(const nlohmann::json& j);
SceneSpec read_scene(const std::filesystem::path& path);

}  // namespace erpm
