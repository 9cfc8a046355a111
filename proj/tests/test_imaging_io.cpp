#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "igdts/affine.hpp"
#include "igdts/errors.hpp"
#include "igdts/image_codec.hpp"
#include "igdts/imaging_io.hpp"

using namespace igdts;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("igdts_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

Frame pattern_frame(int w, int h) {
  Frame f(w, h);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) f.at(r, c) = static_cast<float>(((r * 37 + c * 11) % 256) / 255.0);
  return f;
}

RasterImage gray_raster(int w, int h, std::uint16_t value) {
  RasterImage img;
  img.width = w;
  img.height = h;
  img.samples.assign(static_cast<std::size_t>(w) * h, value);
  return img;
}

}  // namespace

TEST(ImageCodec, PnmVariantsDecode) {
  TempDir dir;
  write_text(dir.path() / "a.pgm", "P2\n# comment\n2 2\n255\n0 255\n128 64\n");
  const auto a = read_image(dir.path() / "a.pgm");
  EXPECT_EQ(a.width, 2);
  EXPECT_EQ(a.channels, 1);
  EXPECT_EQ(a.samples, (std::vector<std::uint16_t>{0, 255, 128, 64}));
  write_text(dir.path() / "b.ppm", "P3 1 1 255 255 0 0\n");
  const auto b = read_image(dir.path() / "b.ppm");
  EXPECT_EQ(b.channels, 3);
  EXPECT_EQ(b.samples, (std::vector<std::uint16_t>{255, 0, 0}));
  write_text(dir.path() / "c.pgm", std::string("P5\n2 1\n65535\n\xff\xff\x00\x01", 17));
  const auto c = read_image(dir.path() / "c.pgm");
  EXPECT_EQ(c.max_value, 65535);
  EXPECT_EQ(c.samples, (std::vector<std::uint16_t>{65535, 1}));
  write_text(dir.path() / "bad.pgm", "P5\n4 4\n255\nab");
  EXPECT_THROW(read_image(dir.path() / "bad.pgm"), IoError);
  EXPECT_THROW(read_image(dir.path() / "missing.pgm"), IoError);
}

TEST(ImageCodec, PngAndPnmRoundTrip) {
  TempDir dir;
  RasterImage rgb;
  rgb.width = 3;
  rgb.height = 2;
  rgb.channels = 3;
  for (int i = 0; i < 18; ++i) rgb.samples.push_back(static_cast<std::uint16_t>(i * 14));
  write_image(dir.path() / "x.png", rgb);
  write_image(dir.path() / "x.ppm", rgb);
  EXPECT_EQ(read_image(dir.path() / "x.png").samples, rgb.samples);
  EXPECT_EQ(read_image(dir.path() / "x.ppm").samples, rgb.samples);
  const auto g = gray_raster(4, 3, 77);
  write_image(dir.path() / "g.png", g);
  write_image(dir.path() / "g.pgm", g);
  EXPECT_EQ(read_image(dir.path() / "g.png").samples, g.samples);
  EXPECT_EQ(read_image(dir.path() / "g.pgm").samples, g.samples);
  EXPECT_THROW(write_image(dir.path() / "g.ppm", g), std::exception);
}

TEST(Frame, ScalingAndLuma) {
  EXPECT_EQ(Frame::from_raster(gray_raster(3, 3, 255)).pixels()[4], 1.0f);
  RasterImage red;
  red.width = red.height = 1;
  red.channels = 3;
  red.samples = {255, 0, 0};
  EXPECT_NEAR(Frame::from_raster(red).at(0, 0), 0.299, 1e-6);
  const Frame f = pattern_frame(7, 5);
  EXPECT_EQ(Frame::from_raster(f.to_raster()).pixels().size(), 35u);
  for (std::size_t i = 0; i < 35; ++i) EXPECT_EQ(Frame::from_raster(f.to_raster()).pixels()[i], f.pixels()[i]);
}

TEST(LoadSequence, OrderedFramesAndErrors) {
  TempDir dir;
  for (int i = 3; i >= 1; --i) {
    char name[16];
    std::snprintf(name, sizeof name, "%04d.pgm", i);
    write_image(dir.path() / name, gray_raster(2, 2, static_cast<std::uint16_t>(i * 50)));
  }
  write_text(dir.path() / "notes.txt", "ignored");
  const auto frames = load_sequence(dir.path(), "%04d.pgm");
  ASSERT_EQ(frames.size(), 3u);
  for (int i = 0; i < 3; ++i) EXPECT_FLOAT_EQ(frames[i].at(0, 0), static_cast<float>((i + 1) * 50 / 255.0));
  fs::remove(dir.path() / "0002.pgm");
  EXPECT_THROW(load_sequence(dir.path(), "%04d.pgm"), IoError);
  EXPECT_THROW(load_sequence(dir.path(), "img%05d.png"), IoError);
  write_image(dir.path() / "0002.pgm", gray_raster(3, 2, 1));
  EXPECT_THROW(load_sequence(dir.path(), "%04d.pgm"), IoError);
}

TEST(WarpPatch, ConstantRegion) {
  const Frame f(40, 40, 0.25f);
  AffineState s;
  s.tx = 20;
  s.ty = 20;
  const auto p = warp_patch(f, s, 16);
  ASSERT_EQ(p.size(), 256);
  for (double v : p) EXPECT_FLOAT_EQ(static_cast<float>(v), 0.25f);
}

TEST(WarpPatch, IntegerTranslationCopiesPixels) {
  const Frame f = pattern_frame(50, 40);
  const int side = 10;
  for (int dx : {5, 12, 30})
    for (int dy : {5, 17}) {
      AffineState s;
      s.tx = dx + side / 2.0;
      s.ty = dy + side / 2.0;
      const auto p = warp_patch(f, s, side);
      for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c) EXPECT_EQ(p[r * side + c], static_cast<double>(f.at(dy + r, dx + c)));
    }
}

TEST(WarpPatch, InverseWarpRoundTripOnSmoothImage) {
  const int n = 48;
  Frame f(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) f.at(r, c) = static_cast<float>(0.5 + 0.3 * std::sin(c / 9.0) * std::cos(r / 11.0));
  AffineState s;
  s.tx = s.ty = n / 2.0;
  s.theta = 0.2;
  s.scale = 0.9;
  s.aspect = 1.1;
  s.skew = 0.05;
  const auto p = warp_patch(f, s, n);
  Eigen::VectorXd pv = p;
  std::vector<float> px(pv.data(), pv.data() + pv.size());
  const Frame patch_frame(n, n, std::vector<float>(px.begin(), px.end()));
  const AffineState back = AffineState::from_matrix(s.linear().inverse(), Eigen::Vector2d(n / 2.0, n / 2.0));
  const auto q = warp_patch(patch_frame, back, n);
  // Compare away from the clamped border.
  for (int r = 12; r < n - 12; ++r)
    for (int c = 12; c < n - 12; ++c) EXPECT_NEAR(q[r * n + c], f.at(r, c), 1e-2) << r << "," << c;
}

TEST(WarpPatch, OutsideFrameDetection) {
  const Frame f(30, 30);
  AffineState s;
  s.tx = 15;
  s.ty = 15;
  EXPECT_FALSE(warp_outside_frame(f, s, 8));
  s.tx = -10;
  EXPECT_TRUE(warp_outside_frame(f, s, 8));
  s.tx = -3;  // straddles the left edge
  EXPECT_FALSE(warp_outside_frame(f, s, 8));
}

TEST(GroundTruth, Formats) {
  TempDir dir;
  write_text(dir.path() / "a.txt", "10,20,30,40\n10\t20\t30\t40\n10,20,40,20,40,60,10,60\n");
  const auto gt = parse_ground_truth(dir.path() / "a.txt");
  ASSERT_EQ(gt.boxes.size(), 3u);
  for (const auto& b : gt.boxes) EXPECT_EQ(b, (Box{10, 20, 30, 40}));
  write_ground_truth(dir.path() / "b.txt", gt);
  EXPECT_EQ(parse_ground_truth(dir.path() / "b.txt").boxes, gt.boxes);
}

TEST(GroundTruth, ErrorsNameTheLine) {
  TempDir dir;
  write_text(dir.path() / "bad.txt", "1,2,3,4\n1,2,x,4\n");
  try {
    parse_ground_truth(dir.path() / "bad.txt");
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
  }
  write_text(dir.path() / "neg.txt", "1,2,0,4\n");
  EXPECT_THROW(parse_ground_truth(dir.path() / "neg.txt"), IoError);
  write_text(dir.path() / "gap.txt", "1,2,3,4\n\n1,2,3,4\n");
  EXPECT_THROW(parse_ground_truth(dir.path() / "gap.txt"), IoError);
}

TEST(Overlay, UnchangedWithoutBoxes) {
  TempDir dir;
  const Frame f = pattern_frame(20, 15);
  write_overlay(f, {}, dir.path() / "o.pgm");
  EXPECT_EQ(read_image(dir.path() / "o.pgm").samples, f.to_raster().samples);
}

TEST(Overlay, PerimeterPixelCount) {
  TempDir dir;
  const Frame f(40, 30, 0.0f);
  const ColoredBox boxes[] = {{Box{5, 4, 12, 9}, {255, 0, 0}}};
  write_overlay(f, boxes, dir.path() / "o.ppm");
  const auto img = read_image(dir.path() / "o.ppm");
  int colored = 0;
  for (std::size_t i = 0; i < img.samples.size(); i += 3) colored += img.samples[i] == 255;
  EXPECT_EQ(colored, 2 * (12 + 9) - 4);
}

TEST(Overlay, PartiallyOutsideIsClipped) {
  TempDir dir;
  const Frame f(20, 20, 0.0f);
  const ColoredBox boxes[] = {{Box{-5, -5, 10, 10}, {0, 255, 0}}};
  EXPECT_NO_THROW(write_overlay(f, boxes, dir.path() / "o.ppm"));
  const auto img = read_image(dir.path() / "o.ppm");
  int colored = 0;
  for (std::size_t i = 0; i < img.samples.size(); i += 3) colored += img.samples[i + 1] == 255;
  // Only the right and bottom edges (x = 4, y = 4) fall inside.
  EXPECT_EQ(colored, 5 + 5 - 1);
}

TEST(FormatNumber, ShortestRoundTrip) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(2.0), "2");
  const double v = 1.0 / 3.0;
  EXPECT_EQ(std::stod(format_number(v)), v);
}
