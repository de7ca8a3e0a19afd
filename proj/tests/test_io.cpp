#include <gtest/gtest.h>

#include <cstring>
#include <fstream>
#include <sstream>

#include "erpmotion/error.hpp"
#include "erpmotion/image_io.hpp"
#include "support.hpp"

using namespace erpm;

namespace {

std::string file_bytes(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST(Erpf, RoundTripIsBitExact) {
  test::TempDir dir("erpf");
  FloatRaster r(5, 7, 4);
  std::mt19937 gen(1);
  for (float& v : r.values()) v = std::normal_distribution<float>()(gen);
  write_erpf(r, dir / "a.erpf");
  EXPECT_EQ(read_erpf(dir / "a.erpf"), r);
}

TEST(Erpf, HeaderAndPlanarLayout) {
  FloatRaster r(2, 3, 2);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 3; ++j) {
      r.at(i, j, 0) = static_cast<float>(i * 3 + j);
      r.at(i, j, 1) = static_cast<float>(100 + i * 3 + j);
    }
  }
  std::ostringstream os;
  write_erpf(os, r);
  const std::string s = os.str();
  ASSERT_EQ(s.size(), 16u + 2 * 3 * 2 * 4);
  EXPECT_EQ(s.substr(0, 4), "ERPF");
  EXPECT_EQ(s[4], 2);
  EXPECT_EQ(s[8], 3);
  EXPECT_EQ(s[12], 2);
  // Second float of the first plane is pixel (0, 1) channel 0; the seventh is
  // the start of plane 1.
  float v1 = 0.0f, v6 = 0.0f;
  std::memcpy(&v1, s.data() + 16 + 4, 4);
  std::memcpy(&v6, s.data() + 16 + 24, 4);
  EXPECT_EQ(v1, 1.0f);
  EXPECT_EQ(v6, 100.0f);
}

TEST(Erpf, RejectsBadInput) {
  std::istringstream bad_magic(std::string("ERPX\2\0\0\0\2\0\0\0\1\0\0\0", 16));
  EXPECT_THROW(read_erpf(bad_magic, "x"), FormatError);
  std::istringstream truncated(std::string("ERPF\2\0\0\0\2\0\0\0\1\0\0\0\0\0", 18));
  EXPECT_THROW(read_erpf(truncated, "x"), FormatError);
  EXPECT_THROW(read_erpf(std::filesystem::path("/nonexistent/a.erpf")), FormatError);
}

TEST(Png, EightBitQuantization) {
  test::TempDir dir("png");
  ErpImage img(4, 8, 3);
  for (std::size_t k = 0; k < img.size(); ++k) img.values()[k] = static_cast<float>(k % 256) / 255.0f;
  write_png(img, dir / "a.png");
  EXPECT_EQ(read_png(dir / "a.png"), img);
  ErpImage odd(2, 4, 1, 0.5f);
  write_png(odd, dir / "b.png");
  EXPECT_FLOAT_EQ(read_png(dir / "b.png").at(0, 0), 128.0f / 255.0f);
}

TEST(Png, BadFileNamesPath) {
  test::TempDir dir("pngbad");
  std::ofstream(dir / "x.png") << "not a png";
  try {
    read_png(dir / "x.png");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("x.png"), std::string::npos);
  }
}

TEST(Frames, DirectoryRoundTripInOrder) {
  test::TempDir dir("frames");
  std::vector<ErpImage> frames;
  for (int t = 0; t < 12; ++t) frames.push_back(ErpImage(4, 8, 1, t / 20.0f));
  write_frames(frames, dir.path(), "frame", "erpf");
  EXPECT_EQ(frame_name("frame", 3, "png"), "frame_0003.png");
  const auto back = read_frames(dir.path());
  ASSERT_EQ(back.size(), frames.size());
  for (std::size_t t = 0; t < frames.size(); ++t) EXPECT_EQ(back[t], frames[t]);
  EXPECT_EQ(file_bytes(dir / "frame_0000.erpf").size(), 16u + 32 * 4);
}
