#pragma once

#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "erpmotion/image_io.hpp"
#include "erpmotion/raster.hpp"
#include "support.hpp"

namespace erpm::test {

// Right half is a copy of the left half.
inline ErpImage duplicated_halves(int h, std::uint32_t seed) {
  ErpImage img = random_image(h, 2 * h, 3, seed);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < h; ++j) {
      for (int c = 0; c < 3; ++c) img.at(i, j + h, c) = img.at(i, j, c);
    }
  }
  return img;
}

inline bool inside_inscribed_circle(int i, int j, int h, int w) {
  const double di = i + 0.5 - h / 2.0;
  const double dj = j + 0.5 - w / 2.0;
  const double r = std::min(h, w) / 2.0;
  return di * di + dj * dj <= r * r;
}

// Bright textured disc on black.
inline ErpImage fisheye_frame(int h, std::uint32_t seed) {
  const int w = 2 * h;
  ErpImage img = random_image(h, w, 3, seed);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      for (int c = 0; c < 3; ++c) {
        float& v = img.at(i, j, c);
        v = inside_inscribed_circle(i, j, h, w) ? 0.6f + 0.4f * v : 0.0f;
      }
    }
  }
  return img;
}

inline std::vector<ErpImage> static_video(int h, int frames, std::uint64_t seed) {
  return std::vector<ErpImage>(frames, blob_image(h, 2 * h, seed));
}

inline std::vector<ErpImage> rolled_video(int h, int frames, int px_per_frame, std::uint64_t seed) {
  const ErpImage base = blob_image(h, 2 * h, seed);
  std::vector<ErpImage> out;
  for (int t = 0; t < frames; ++t) out.push_back(roll_columns(base, t * px_per_frame));
  return out;
}

inline void write_video(const std::filesystem::path& dir, const std::vector<ErpImage>& frames, double fps,
                        const std::string& id, const std::string& ext = "png") {
  write_frames(frames, dir, "frame", ext);
  std::ofstream(dir / "meta.json") << nlohmann::json{{"fps", fps}, {"id", id}}.dump();
}

// Four-video corpus: stereo, fisheye, static and moving at 2 fps.
inline void write_fixture_corpus(const std::filesystem::path& root) {
  std::vector<ErpImage> stereo, fisheye;
  for (int t = 0; t < 8; ++t) {
    stereo.push_back(duplicated_halves(64, 10 + t));
    fisheye.push_back(fisheye_frame(64, 20 + t));
  }
  write_video(root / "a_stereo", stereo, 2.0, "stereo");
  write_video(root / "b_fisheye", fisheye, 2.0, "fisheye");
  write_video(root / "c_static", static_video(256, 8, 5), 2.0, "static");
  write_video(root / "d_moving", rolled_video(256, 8, 5, 6), 2.0, "moving");
}

}  // namespace erpm::test
