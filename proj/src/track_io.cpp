#include <fstream>

#include <json.hpp>

#include "erpmotion/decouple.hpp"
#include "erpmotion/error.hpp"

namespace erpm {

void write_track(const RotationTrack& track, int height, int width, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["height"] = height;
  j["width"] = width;
  j["frames"] = track.size();
  auto& qs = j["quaternions"] = nlohmann::ordered_json::array();
  for (const Rotation& r : track.rotations()) {
    const auto q = r.quaternion();
    qs.push_back({q[0], q[1], q[2], q[3]});
  }
  std::ofstream os(path);
  if (!os) throw FormatError(path.string() + ": cannot open for writing");
  os << j.dump(2) << '\n';
}

LoadedTrack read_track(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw FormatError(path.string() + ": cannot open");
  try {
    const auto j = nlohmann::json::parse(is);
    LoadedTrack out;
    out.height = j.at("height").get<int>();
    out.width = j.at("width").get<int>();
    const auto& qs = j.at("quaternions");
    if (!qs.is_array() || qs.empty()) throw FormatError(path.string() + ": empty quaternion list");
    if (j.contains("frames") && j.at("frames").get<std::size_t>() != qs.size()) {
      throw FormatError(path.string() + ": frame count disagrees with quaternion list");
    }
    std::vector<Rotation> rs;
    for (std::size_t t = 0; t < qs.size(); ++t) {
      const auto q = qs[t].get<std::array<double, 4>>();
      rs.push_back(t == 0 ? Rotation::identity() : Rotation::from_quaternion(q));
      if (t == 0 && Rotation::from_quaternion(q).angle_deg() > 1e-6) {
        throw FormatError(path.string() + ": first rotation is not the identity");
      }
    }
    out.track = RotationTrack(std::move(rs));
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const DomainError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace erpm
