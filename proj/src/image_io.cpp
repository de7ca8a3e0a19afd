#include "erpmotion/image_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include <png.h>

#include "erpmotion/error.hpp"

namespace erpm {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void read_exact(std::istream& is, char* dst, std::size_t n, const std::string& name) {
  is.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(is.gcount()) != n) throw FormatError(name + ": truncated file");
}

std::string lower_ext(const fs::path& p) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return e;
}

}  // namespace

void put_u32(std::ostream& os, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                              static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
  os.write(b.data(), 4);
}

void put_i32(std::ostream& os, std::int32_t v) { put_u32(os, static_cast<std::uint32_t>(v)); }

void put_u16(std::ostream& os, std::uint16_t v) {
  const std::array<char, 2> b{static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF)};
  os.write(b.data(), 2);
}

void put_f32(std::ostream& os, float v) { put_u32(os, std::bit_cast<std::uint32_t>(v)); }

std::uint32_t get_u32(std::istream& is, const std::string& name) {
  std::array<unsigned char, 4> b{};
  read_exact(is, reinterpret_cast<char*>(b.data()), 4, name);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::int32_t get_i32(std::istream& is, const std::string& name) { return static_cast<std::int32_t>(get_u32(is, name)); }

std::uint16_t get_u16(std::istream& is, const std::string& name) {
  std::array<unsigned char, 2> b{};
  read_exact(is, reinterpret_cast<char*>(b.data()), 2, name);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

float get_f32(std::istream& is, const std::string& name) { return std::bit_cast<float>(get_u32(is, name)); }

ErpImage read_png(const fs::path& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw FormatError(path.string() + ": cannot open");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(path.string() + ": libpng initialisation failed");
  }
  std::vector<png_bytep> rows;
  std::vector<unsigned char> buffer;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(path.string() + ": not a readable PNG");
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (bit_depth == 16) png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);
  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  const int nc = png_get_channels(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  buffer.resize(stride * h);
  rows.resize(h);
  for (int i = 0; i < h; ++i) rows[i] = buffer.data() + stride * i;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);

  if (nc != 1 && nc != 3) throw FormatError(path.string() + ": unsupported channel layout");
  ErpImage img(h, w, nc);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      for (int c = 0; c < nc; ++c) img.at(i, j, c) = static_cast<float>(rows[i][j * nc + c] / 255.0);
    }
  }
  return img;
}

void write_png(const ErpImage& img, const fs::path& path) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw FormatError(path.string() + ": cannot open for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw FormatError(path.string() + ": libpng initialisation failed");
  }
  const int h = img.height();
  const int w = img.width();
  const int nc = img.channels();
  std::vector<unsigned char> buffer(static_cast<std::size_t>(h) * w * nc);
  for (std::size_t k = 0; k < buffer.size(); ++k) {
    const double v = std::clamp(static_cast<double>(img.values()[k]), 0.0, 1.0);
    buffer[k] = static_cast<unsigned char>(std::lround(v * 255.0));
  }
  std::vector<png_bytep> rows(h);
  for (int i = 0; i < h; ++i) rows[i] = buffer.data() + static_cast<std::size_t>(i) * w * nc;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw FormatError(path.string() + ": PNG encoding failed");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, w, h, 8, nc == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void write_erpf(std::ostream& os, const FloatRaster& r) {
  os.write("ERPF", 4);
  put_u32(os, static_cast<std::uint32_t>(r.height()));
  put_u32(os, static_cast<std::uint32_t>(r.width()));
  put_u32(os, static_cast<std::uint32_t>(r.channels()));
  for (int c = 0; c < r.channels(); ++c) {
    for (int i = 0; i < r.height(); ++i) {
      for (int j = 0; j < r.width(); ++j) put_f32(os, r.at(i, j, c));
    }
  }
}

FloatRaster read_erpf(std::istream& is, const std::string& name) {
  std::array<char, 4> magic{};
  read_exact(is, magic.data(), 4, name);
  if (std::memcmp(magic.data(), "ERPF", 4) != 0) throw FormatError(name + ": bad ERPF magic");
  const std::uint32_t h = get_u32(is, name);
  const std::uint32_t w = get_u32(is, name);
  const std::uint32_t c = get_u32(is, name);
  if (h == 0 || w == 0 || c == 0 || h > (1u << 16) || w > (1u << 16) || c > 4096) {
    throw FormatError(name + ": implausible ERPF dimensions");
  }
  FloatRaster r(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c));
  std::vector<unsigned char> plane(static_cast<std::size_t>(h) * w * 4);
  for (int ch = 0; ch < r.channels(); ++ch) {
    read_exact(is, reinterpret_cast<char*>(plane.data()), plane.size(), name);
    for (std::size_t k = 0; k < static_cast<std::size_t>(h) * w; ++k) {
      const unsigned char* b = plane.data() + 4 * k;
      const std::uint32_t bits = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
                                 (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
      r.at(static_cast<int>(k / w), static_cast<int>(k % w), ch) = std::bit_cast<float>(bits);
    }
  }
  return r;
}

void write_erpf(const FloatRaster& r, const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError(path.string() + ": cannot open for writing");
  write_erpf(os, r);
  if (!os) throw FormatError(path.string() + ": write failed");
}

FloatRaster read_erpf(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError(path.string() + ": cannot open");
  return read_erpf(is, path.string());
}

ErpImage read_frame(const fs::path& path) {
  const std::string ext = lower_ext(path);
  if (ext == ".png") return read_png(path);
  if (ext == ".erpf") {
    try {
      return ErpImage(read_erpf(path));
    } catch (const ShapeError& e) {
      throw FormatError(path.string() + ": " + e.what());
    }
  }
  throw FormatError(path.string() + ": unsupported frame format");
}

void write_frame(const ErpImage& img, const fs::path& path) {
  const std::string ext = lower_ext(path);
  if (ext == ".png") return write_png(img, path);
  if (ext == ".erpf") return write_erpf(img, path);
  throw FormatError(path.string() + ": unsupported frame format");
}

std::vector<fs::path> list_frames(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw FormatError(dir.string() + ": not a directory");
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = lower_ext(entry.path());
    if (ext == ".png" || ext == ".erpf") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<ErpImage> read_frames(const fs::path& dir) {
  std::vector<ErpImage> frames;
  for (const auto& p : list_frames(dir)) frames.push_back(read_frame(p));
  return frames;
}

std::string frame_name(const std::string& prefix, std::size_t index, const std::string& ext) {
  std::ostringstream ss;
  ss << prefix << '_' << std::setw(4) << std::setfill('0') << index << '.' << ext;
  return ss.str();
}

void write_frames(const std::vector<ErpImage>& frames, const fs::path& dir, const std::string& prefix,
                  const std::string& ext) {
  fs::create_directories(dir);
  for (std::size_t t = 0; t < frames.size(); ++t) write_frame(frames[t], dir / frame_name(prefix, t, ext));
}

}  // namespace erpm
