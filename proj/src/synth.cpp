#include "erpmotion/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

#include <Eigen/Geometry>

#include "erpmotion/error.hpp"
#include "erpmotion/parallel.hpp"
#include "erpmotion/rng.hpp"

namespace erpm {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

SphereDir dir_from_lonlat(double lon_deg, double lat_deg) {
  const double lon = lon_deg * kDeg;
  const double lat = lat_deg * kDeg;
  return {std::cos(lat) * std::sin(lon), std::sin(lat), std::cos(lat) * std::cos(lon)};
}

class GradTexture final : public Texture {
 public:
  std::array<double, 3> eval(const SphereDir& d) const override {
    // Latitude ramp and the two horizontal direction components.
    return {0.5 + 0.5 * d.y(), 0.5 + 0.5 * d.x(), 0.5 + 0.5 * d.z()};
  }
};

class CheckerTexture final : public Texture {
 public:
  explicit CheckerTexture(int n) : cell_(180.0 / n) {}
  std::array<double, 3> eval(const SphereDir& d) const override {
    const double lat = std::asin(std::clamp(d.y(), -1.0, 1.0)) / kDeg;
    const double lon = std::atan2(d.x(), d.z()) / kDeg;
    const long a = static_cast<long>(std::floor((lon + 180.0) / cell_));
    const long b = static_cast<long>(std::floor((lat + 90.0) / cell_));
    const double v = ((a + b) % 2 == 0) ? 0.8 : 0.2;
    return {v, v, v};
  }

 private:
  double cell_;
};

// Sum of Gaussian bumps squashed into (0, 1). Blobs are bucketed on a 3D
// grid so only nearby centers are visited; contributions are summed in blob
// index order so the result matches a brute-force evaluation bit for bit.
class BlobTexture final : public Texture {
 public:
  BlobTexture(std::vector<Blob> blobs, double sigma_deg)
      : blobs_(std::move(blobs)), cutoff2_(blob_cutoff_chord2(sigma_deg)) {
    const double sigma_chord = 2.0 * std::sin(0.5 * sigma_deg * kDeg);
    inv_two_sigma2_ = 1.0 / (2.0 * sigma_chord * sigma_chord);
    cell_ = std::sqrt(cutoff2_);
    n_ = std::max(1, static_cast<int>(std::ceil(2.0 / cell_)));
    cells_.resize(static_cast<std::size_t>(n_) * n_ * n_);
    for (std::size_t k = 0; k < blobs_.size(); ++k) {
      const auto c = cell_of(blobs_[k].center);
      cells_[flat(c[0], c[1], c[2])].push_back(static_cast<int>(k));
    }
  }

  std::array<double, 3> eval(const SphereDir& d) const override {
    const auto c = cell_of(d);
    thread_local std::vector<std::pair<int, double>> hits;
    hits.clear();
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dz = -1; dz <= 1; ++dz) {
          const int x = c[0] + dx, y = c[1] + dy, z = c[2] + dz;
          if (x < 0 || y < 0 || z < 0 || x >= n_ || y >= n_ || z >= n_) continue;
          for (int k : cells_[flat(x, y, z)]) {
            const double d2 = (d - blobs_[k].center).squaredNorm();
            if (d2 < cutoff2_) hits.emplace_back(k, std::exp(-d2 * inv_two_sigma2_));
          }
        }
      }
    }
    std::sort(hits.begin(), hits.end());
    std::array<double, 3> s{0.0, 0.0, 0.0};
    for (const auto& [k, g] : hits) {
      for (int ch = 0; ch < 3; ++ch) s[ch] += blobs_[k].amplitude[ch] * g;
    }
    for (double& v : s) v = 0.5 + 0.5 * std::tanh(v);
    return s;
  }

 private:
  std::array<int, 3> cell_of(const SphereDir& d) const {
    std::array<int, 3> c{};
    for (int a = 0; a < 3; ++a) c[a] = std::clamp(static_cast<int>(std::floor((d[a] + 1.0) / cell_)), 0, n_ - 1);
    return c;
  }
  std::size_t flat(int x, int y, int z) const { return (static_cast<std::size_t>(x) * n_ + y) * n_ + z; }

  std::vector<Blob> blobs_;
  double cutoff2_;
  double inv_two_sigma2_ = 0.0;
  double cell_ = 1.0;
  int n_ = 1;
  std::vector<std::vector<int>> cells_;
};

double gray(const std::array<double, 3>& c) { return 0.299 * c[0] + 0.587 * c[1] + 0.114 * c[2]; }

}  // namespace

double blob_cutoff_chord2(double sigma_deg) {
  const double sigma_chord = 2.0 * std::sin(0.5 * sigma_deg * kDeg);
  // exp(-d2 / (2 sigma^2)) < 1e-4 beyond this squared chord distance.
  return 2.0 * sigma_chord * sigma_chord * std::log(1e4);
}

std::vector<Blob> draw_blobs(const TextureSpec& spec, std::uint64_t seed) {
  const CounterRng rng(derive_seed(seed, "blob-texture"));
  std::vector<Blob> blobs(spec.blob_count);
  std::uint64_t counter = 0;
  for (auto& b : blobs) {
    SphereDir c;
    do {
      c = {rng.normal(counter), rng.normal(counter + 1), rng.normal(counter + 2)};
      counter += 3;
    } while (c.norm() < 1e-6);
    b.center = c.normalized();
    for (double& a : b.amplitude) a = 2.0 * rng.uniform(counter++) - 1.0;
  }
  return blobs;
}

std::unique_ptr<Texture> make_texture(const TextureSpec& spec, std::uint64_t seed) {
  switch (spec.kind) {
    case TextureKind::LatLongGrad:
      return std::make_unique<GradTexture>();
    case TextureKind::Checker:
      if (spec.checker_n <= 0) throw ConfigError("checker texture needs n > 0");
      return std::make_unique<CheckerTexture>(spec.checker_n);
    case TextureKind::Blobs:
      if (spec.blob_count <= 0 || !(spec.blob_sigma_deg > 0.0)) throw ConfigError("blob texture needs count > 0 and sigma > 0");
      return std::make_unique<BlobTexture>(draw_blobs(spec, seed), spec.blob_sigma_deg);
  }
  throw ConfigError("unknown texture kind");
}

SphereDir DiscSpec::center() const { return dir_from_lonlat(lon_deg, lat_deg); }

Rotation DiscSpec::motion(double frames) const {
  const double lon = lon_deg * kDeg;
  const double lat = lat_deg * kDeg;
  const SphereDir east(std::cos(lon), 0.0, -std::sin(lon));
  const SphereDir north(-std::sin(lat) * std::sin(lon), std::cos(lat), -std::sin(lat) * std::cos(lon));
  const SphereDir heading = std::cos(heading_deg * kDeg) * east + std::sin(heading_deg * kDeg) * north;
  return Rotation::from_axis_angle(center().cross(heading), speed_deg_per_frame * frames);
}

void SceneSpec::validate() const {
  if (height < 2 || width != 2 * height) throw ConfigError("scene: requires W == 2H and H >= 2");
  if (frames < 1) throw ConfigError("scene: needs at least one frame");
  if (channels != 1 && channels != 3) throw ConfigError("scene: channels must be 1 or 3");
  if (static_cast<int>(camera.size()) != frames) throw ConfigError("scene: camera track length differs from frame count");
  if (disc && !(disc->radius_deg > 0.0 && disc->radius_deg < 90.0)) throw ConfigError("scene: disc radius must lie in (0, 90)");
}

namespace {

struct DiscState {
  SphereDir center;
  Rotation motion;  // frame 0 -> frame t
  double cos_radius;
};

DiscState disc_state(const DiscSpec& disc, int t) {
  const Rotation m = disc.motion(t);
  return {m * disc.center(), m, std::cos(disc.radius_deg * kDeg)};
}

// Fixed offset so that the disc pattern differs from the background texture.
const Rotation& disc_pattern_offset() {
  static const Rotation r = rotation_from_euler(71.0, 23.0, -37.0);
  return r;
}

// World direction seen at pixel (i, j) through camera R (rt = R^T). Results
// within 1e-9 px of a pixel center are snapped onto that center's direction,
// which makes integer-column yaws reproduce frame 0 exactly.
SphereDir world_dir(const Eigen::Matrix3d& rt, int i, int j, int h, int w) {
  const SphereDir world = rt * pixel_to_dir(i, j, h, w);
  const PixelCoord p = dir_to_pixel(world, h, w);
  const double ri = std::nearbyint(p.i);
  const double rj = std::nearbyint(p.j);
  if (std::abs(p.i - ri) < 1e-9 && std::abs(p.j - rj) < 1e-9 && ri >= 0 && ri < h) {
    return pixel_to_dir(ri, wrap_index(static_cast<int>(rj), w), h, w);
  }
  return world;
}

}  // namespace

ErpImage render_frame(const SceneSpec& spec, int t) {
  spec.validate();
  const auto tex = make_texture(spec.texture, spec.seed);
  const int h = spec.height;
  const int w = spec.width;
  const Eigen::Matrix3d rt = spec.camera[t].matrix().transpose();
  std::optional<DiscState> disc;
  if (spec.disc) disc = disc_state(*spec.disc, t);
  ErpImage out(h, w, spec.channels);
  parallel_for(static_cast<std::size_t>(h), [&](std::size_t row) {
    const int i = static_cast<int>(row);
    for (int j = 0; j < w; ++j) {
      const SphereDir world = world_dir(rt, i, j, h, w);
      std::array<double, 3> c;
      if (disc && world.dot(disc->center) > disc->cos_radius) {
        const DiscSpec& d = *spec.disc;
        double shade = 1.0;
        if (d.textured) {
          const SphereDir local = disc_pattern_offset() * (disc->motion.transpose() * world);
          shade = 0.35 + 0.65 * gray(tex->eval(local));
        }
        c = {d.color[0] * shade, d.color[1] * shade, d.color[2] * shade};
      } else {
        c = tex->eval(world);
      }
      auto px = out.pixel(i, j);
      if (spec.channels == 1) {
        px[0] = static_cast<float>(gray(c));
      } else {
        for (int ch = 0; ch < 3; ++ch) px[ch] = static_cast<float>(c[ch]);
      }
    }
  });
  return out;
}

std::vector<ErpImage> render(const SceneSpec& spec) {
  spec.validate();
  std::vector<ErpImage> frames;
  frames.reserve(spec.frames);
  for (int t = 0; t < spec.frames; ++t) frames.push_back(render_frame(spec, t));
  return frames;
}

std::vector<bool> disc_mask(const SceneSpec& spec, int t) {
  spec.validate();
  const int h = spec.height;
  const int w = spec.width;
  std::vector<bool> mask(static_cast<std::size_t>(h) * w, false);
  if (!spec.disc) return mask;
  const DiscState disc = disc_state(*spec.disc, t);
  const Eigen::Matrix3d rt = spec.camera[t].matrix().transpose();
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      mask[static_cast<std::size_t>(i) * w + j] = world_dir(rt, i, j, h, w).dot(disc.center) > disc.cos_radius;
    }
  }
  return mask;
}

std::vector<FlowField> gt_flows(const SceneSpec& spec) {
  spec.validate();
  std::vector<FlowField> flows;
  const int h = spec.height;
  const int w = spec.width;
  for (int t = 0; t + 1 < spec.frames; ++t) {
    const Eigen::Matrix3d cur_t = spec.camera[t].matrix().transpose();
    const Eigen::Matrix3d next = spec.camera[t + 1].matrix();
    std::optional<DiscState> disc;
    Eigen::Matrix3d step = Eigen::Matrix3d::Identity();
    if (spec.disc) {
      disc = disc_state(*spec.disc, t);
      step = spec.disc->motion(1.0).matrix();
    }
    flows.push_back(flow_from_targets(h, w, [&](int i, int j) {
      const SphereDir world = world_dir(cur_t, i, j, h, w);
      if (disc && world.dot(disc->center) > disc->cos_radius) return SphereDir(next * (step * world));
      return SphereDir(next * world);
    }));
  }
  return flows;
}

namespace {

RotationTrack camera_from_json(const nlohmann::json& cam, int frames) {
  if (cam.contains("euler_rate")) {
    const auto e = cam.at("euler_rate").get<std::array<double, 3>>();
    const Rotation step = rotation_from_euler(e[0], e[1], e[2]);
    return accumulate(std::vector<Rotation>(std::max(0, frames - 1), step));
  }
  std::vector<Rotation> rs;
  if (cam.contains("euler")) {
    for (const auto& e : cam.at("euler")) {
      const auto a = e.get<std::array<double, 3>>();
      rs.push_back(rotation_from_euler(a[0], a[1], a[2]));
    }
  } else if (cam.contains("quaternions")) {
    for (const auto& q : cam.at("quaternions")) rs.push_back(Rotation::from_quaternion(q.get<std::array<double, 4>>()));
  } else {
    throw ConfigError("scene camera needs one of euler_rate, euler, quaternions");
  }
  if (rs.empty() || rs.front().angle_deg() > 1e-9) throw ConfigError("scene camera must start at the identity");
  rs.front() = Rotation::identity();
  return RotationTrack(std::move(rs));
}

}  // namespace

SceneSpec scene_from_json(const nlohmann::json& j) {
  try {
    SceneSpec s;
    s.seed = j.value("seed", std::uint64_t{0});
    s.height = j.value("height", 480);
    s.width = j.value("width", 2 * s.height);
    s.frames = j.value("frames", 25);
    s.channels = j.value("channels", 3);
    if (j.contains("texture")) {
      const auto& t = j.at("texture");
      const std::string type = t.value("type", std::string("blobs"));
      if (type == "blobs") {
        s.texture.kind = TextureKind::Blobs;
        s.texture.blob_count = t.value("count", s.texture.blob_count);
        s.texture.blob_sigma_deg = t.value("sigma_deg", s.texture.blob_sigma_deg);
      } else if (type == "checker") {
        s.texture.kind = TextureKind::Checker;
        s.texture.checker_n = t.value("n", s.texture.checker_n);
      } else if (type == "latlong-grad") {
        s.texture.kind = TextureKind::LatLongGrad;
      } else {
        throw ConfigError("scene: unknown texture type '" + type + "'");
      }
    }
    if (j.contains("disc") && !j.at("disc").is_null()) {
      const auto& d = j.at("disc");
      DiscSpec disc;
      disc.lon_deg = d.value("lon_deg", disc.lon_deg);
      disc.lat_deg = d.value("lat_deg", disc.lat_deg);
      disc.radius_deg = d.value("radius_deg", disc.radius_deg);
      disc.speed_deg_per_frame = d.value("speed_deg", disc.speed_deg_per_frame);
      disc.heading_deg = d.value("heading_deg", disc.heading_deg);
      if (d.contains("color")) disc.color = d.at("color").get<std::array<double, 3>>();
      disc.textured = d.value("textured", disc.textured);
      s.disc = disc;
    }
    s.camera = j.contains("camera") ? camera_from_json(j.at("camera"), s.frames)
                                    : accumulate(std::vector<Rotation>(std::max(0, s.frames - 1)));
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scene: ") + e.what());
  }
}

SceneSpec read_scene(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw FormatError(path.string() + ": cannot open");
  try {
    return scene_from_json(nlohmann::json::parse(is));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace erpm
