#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "erpmotion/flow.hpp"
#include "erpmotion/raster.hpp"
#include "erpmotion/synth.hpp"

namespace erpm::test {

// Fresh temporary directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("erpm_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline ErpImage random_image(int h, int w, int c, std::uint32_t seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  ErpImage img(h, w, c);
  for (float& v : img.values()) v = u(gen);
  return img;
}

inline FlowField random_flow(int h, int w, std::uint32_t seed, float scale = 5.0f) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<float> u(-scale, scale);
  FlowField f(h, w);
  for (float& v : f.du_values()) v = u(gen);
  for (float& v : f.dv_values()) v = u(gen);
  return f;
}

// Band-limited blob texture rendered at frame 0 without camera motion.
inline ErpImage blob_image(int h, int w, std::uint64_t seed, int channels = 3) {
  SceneSpec s;
  s.seed = seed;
  s.height = h;
  s.width = w;
  s.frames = 1;
  s.channels = channels;
  return render_frame(s, 0);
}

inline SceneSpec yaw_scene(int h, int frames, double yaw_deg_per_frame, std::uint64_t seed = 3) {
  SceneSpec s;
  s.seed = seed;
  s.height = h;
  s.width = 2 * h;
  s.frames = frames;
  std::vector<Rotation> rs;
  for (int t = 0; t < frames; ++t) rs.push_back(t == 0 ? Rotation::identity() : rotation_from_euler(yaw_deg_per_frame * t, 0, 0));
  s.camera = RotationTrack(rs);
  return s;
}

inline double max_abs_diff(const FloatRaster& a, const FloatRaster& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(double(a.values()[k]) - b.values()[k]));
  return m;
}

}  // namespace erpm::test
