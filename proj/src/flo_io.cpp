#include <bit>
#include <cstring>
#include <fstream>

#include "erpmotion/error.hpp"
#include "erpmotion/flow.hpp"
#include "erpmotion/image_io.hpp"

namespace erpm {

namespace {
constexpr float kFloMagic = 202021.25f;
}

FlowField read_flo(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError(path.string() + ": cannot open");
  const std::string name = path.string();
  char magic[4];
  is.read(magic, 4);
  if (is.gcount() != 4) throw FormatError(name + ": truncated header");
  if (std::memcmp(magic, "PIEH", 4) != 0) throw FormatError(name + ": bad .flo magic");
  const std::int32_t w = get_i32(is, name);
  const std::int32_t h = get_i32(is, name);
  if (w <= 0 || h <= 0 || w > (1 << 16) || h > (1 << 16)) throw FormatError(name + ": non-positive or implausible dimensions");
  FlowField f(h, w);
  std::vector<char> payload(static_cast<std::size_t>(w) * h * 8);
  is.read(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (static_cast<std::size_t>(is.gcount()) != payload.size()) throw FormatError(name + ": truncated payload");
  for (std::size_t k = 0; k < f.pixel_count(); ++k) {
    std::memcpy(&f.du_values()[k], payload.data() + 8 * k, 4);
    std::memcpy(&f.dv_values()[k], payload.data() + 8 * k + 4, 4);
  }
  static_assert(std::endian::native == std::endian::little, "flo payload is copied as little-endian");
  return f;
}

void write_flo(const FlowField& f, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError(path.string() + ": cannot open for writing");
  put_f32(os, kFloMagic);
  put_i32(os, f.width());
  put_i32(os, f.height());
  for (std::size_t k = 0; k < f.pixel_count(); ++k) {
    put_f32(os, f.du_values()[k]);
    put_f32(os, f.dv_values()[k]);
  }
  if (!os) throw FormatError(path.string() + ": write failed");
}

}  // namespace erpm
