#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "erpmotion/raster.hpp"

namespace erpm {

namespace fs = std::filesystem;

// 8-bit PNG. Reading maps v -> v / 255 (alpha dropped, gray/palette expanded);
// writing maps v -> round(clamp(v, 0, 1) * 255).
ErpImage read_png(const fs::path& path);
void write_png(const ErpImage& img, const fs::path& path);

// Raw float container: "ERPF", u32 H, u32 W, u32 C (little endian), then C
// planes of H*W float32 little-endian values. Any channel count is allowed.
void write_erpf(std::ostream& os, const FloatRaster& r);
FloatRaster read_erpf(std::istream& is, const std::string& name);
void write_erpf(const FloatRaster& r, const fs::path& path);
FloatRaster read_erpf(const fs::path& path);

// Dispatches on extension (.png or .erpf).
ErpImage read_frame(const fs::path& path);
void write_frame(const ErpImage& img, const fs::path& path);

// All .png / .erpf files of a directory in lexicographic order.
std::vector<fs::path> list_frames(const fs::path& dir);
std::vector<ErpImage> read_frames(const fs::path& dir);
// Writes <dir>/<prefix>_NNNN.<ext>, creating dir.
void write_frames(const std::vector<ErpImage>& frames, const fs::path& dir, const std::string& prefix,
                  const std::string& ext);

// Zero-padded index used for every per-frame file name.
std::string frame_name(const std::string& prefix, std::size_t index, const std::string& ext);

// Little-endian primitives shared by the binary containers.
void put_u32(std::ostream& os, std::uint32_t v);
void put_i32(std::ostream& os, std::int32_t v);
void put_u16(std::ostream& os, std::uint16_t v);
void put_f32(std::ostream& os, float v);
std::uint32_t get_u32(std::istream& is, const std::string& name);
std::int32_t get_i32(std::istream& is, const std::string& name);
std::uint16_t get_u16(std::istream& is, const std::string& name);
float get_f32(std::istream& is, const std::string& name);

}  // namespace erpm
