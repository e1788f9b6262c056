#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "fixtures.hpp"
#include "scb/bytes.hpp"
#include "scb/errors.hpp"
#include "scb/io.hpp"
#include "scb/saliency.hpp"

using namespace scb;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("scb_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<std::uint8_t> pgm(std::size_t w, std::size_t h, std::vector<std::uint8_t> px) {
  const std::string head = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  std::vector<std::uint8_t> out(head.begin(), head.end());
  out.insert(out.end(), px.begin(), px.end());
  return out;
}

}  // namespace

TEST_CASE("white and black images load as 1 and 0") {
  const auto dir = scratch("bw");
  ImageTensor white(3, 5, 7, 1.0f), black(3, 5, 7, 0.0f);
  save_image((dir / "w.png").string(), white);
  save_image((dir / "b.ppm").string(), black);
  const auto w = load_image((dir / "w.png").string(), 9, 4);
  CHECK(w.channels == 3);
  CHECK(w.height == 9);
  CHECK(w.width == 4);
  CHECK(w.image_id == "w");
  for (float v : w.data) CHECK(v == 1.0f);
  for (float v : load_image((dir / "b.ppm").string()).data) CHECK(v == 0.0f);
}

TEST_CASE("resize of a 2x2 checkerboard to 4x4") {
  const auto dir = scratch("checker");
  write_file_bytes((dir / "c.pgm").string(), pgm(2, 2, {255, 0, 0, 255}));
  const auto img = load_image((dir / "c.pgm").string(), 4, 4);
  REQUIRE(img.channels == 1);
  CHECK(img.at(0, 0, 0) == doctest::Approx(1.0));
  CHECK(img.at(0, 0, 1) == doctest::Approx(0.75));
  CHECK(img.at(0, 1, 1) == doctest::Approx(0.625));
  CHECK(img.at(0, 1, 2) == doctest::Approx(0.375));
  CHECK(img.at(0, 0, 3) == doctest::Approx(0.0));
  CHECK(img.at(0, 3, 3) == doctest::Approx(1.0));
}

TEST_CASE("8-bit images survive PNG and PPM round trips") {
  const auto dir = scratch("rt");
  for (std::size_t c : {1, 3}) {
    ImageTensor img = test::random_image(c, 6, 5, c);
    for (float& v : img.data) v = std::round(v * 255.0f) / 255.0f;
    for (const char* ext : {".png", ".ppm"}) {
      const std::string path = (dir / ("x" + std::to_string(c) + ext)).string();
      save_image(path, img);
      const auto back = load_image(path);
      REQUIRE(back.same_shape(img));
      for (std::size_t i = 0; i < img.data.size(); ++i) CHECK(back.data[i] == doctest::Approx(img.data[i]).epsilon(1e-6));
    }
  }
}

TEST_CASE("unsupported or malformed images") {
  const std::vector<std::uint8_t> junk = {'G', 'I', 'F', '8', '9', 'a'};
  CHECK_THROWS_AS(decode_image(junk, "x.gif"), FormatError);
  CHECK_THROWS_AS(decode_image(pgm(2, 2, {1, 2, 3}), "short.pgm"), FormatError);
  const std::string sixteen = "P5\n1 1\n65535\n\0\0";
  CHECK_THROWS_AS(decode_image(std::vector<std::uint8_t>(sixteen.begin(), sixteen.end()), "deep.pgm"), FormatError);
  CHECK_THROWS_AS(load_image("/nonexistent/none.png"), IoError);
  CHECK_THROWS_AS(save_image("/tmp/out.bmp", ImageTensor(1, 2, 2)), ValidationError);
}

TEST_CASE("heat ramp anchors") {
  for (std::size_t i = 0; i < kHeatRamp.size(); ++i) CHECK(heat_color(i / 4.0) == kHeatRamp[i]);
  CHECK(heat_color(-1.0) == kHeatRamp.front());
  CHECK(heat_color(2.0) == kHeatRamp.back());
  CHECK(heat_color(0.125) == Rgb{0, 128, 255});
}

TEST_CASE("heatmaps ignore positive affine rescaling of the map") {
  const auto img = test::random_image(3, 16, 16, 5);
  SaliencyMap m;
  m.height = m.width = 16;
  const auto raw = test::random_image(1, 16, 16, 6).data;
  m.scores.assign(raw.begin(), raw.end());
  const Heatmap a = heatmap_overlay(img, m);
  CHECK_FALSE(a.constant_map);
  for (auto [scale, shift] : {std::pair{3.0, -1.0}, std::pair{0.01, 40.0}, std::pair{250.0, 0.0}}) {
    SaliencyMap t = m;
    for (double& v : t.scores) v = scale * v + shift;
    const Heatmap b = heatmap_overlay(img, t);
    // Rounding may move a value across a quantisation boundary by one level.
    for (std::size_t i = 0; i < a.rgb.data.size(); ++i) CHECK(std::abs(a.rgb.data[i] - b.rgb.data[i]) <= 1.0f / 255 + 1e-6f);
  }
}

TEST_CASE("constant maps render at mid-ramp with a warning") {
  const auto dir = scratch("heat");
  const ImageTensor gray(1, 4, 4, 0.2f);
  SaliencyMap m;
  m.height = m.width = 4;
  m.scores.assign(16, 7.0);
  const Heatmap h = heatmap_overlay(gray, m);
  CHECK(h.constant_map);
  for (std::size_t i = 0; i < 16; ++i) {
    // Gray 0.2 is 51; blended with mid-ramp green (0, 255, 0) and rounded.
    CHECK(h.rgb.data[i] == std::lround(0.5 * 51) / 255.0f);
    CHECK(h.rgb.data[16 + i] == std::lround(0.5 * 51 + 0.5 * 255) / 255.0f);
  }
  std::stringstream captured;
  auto* old = std::cerr.rdbuf(captured.rdbuf());
  const bool ok = render_heatmap(gray, m, (dir / "h.png").string());
  std::cerr.rdbuf(old);
  CHECK_FALSE(ok);
  CHECK(captured.str().find("constant") != std::string::npos);
  CHECK(fs::exists(dir / "h.png"));

  m.scores[3] = 8.0;
  CHECK(render_heatmap(gray, m, (dir / "h2.png").string()));
  CHECK(load_image((dir / "h2.png").string()).channels == 3);

  SaliencyMap wrong = m;
  wrong.height = 2;
  CHECK_THROWS_AS(heatmap_overlay(gray, wrong), ValidationError);
}

TEST_CASE("curve plots") {
  ProbabilityCurve c;
  c.points = {{0, 0.9}, {0.5, 0.4}, {1, 0.1}};
  const std::string svg = curve_plot_svg({{"shape", c}, {"rise", c}}, "deletion");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("shape") != std::string::npos);
  CHECK(svg.find("AUC") != std::string::npos);
  std::size_t polylines = 0;
  for (std::size_t at = svg.find("<polyline"); at != std::string::npos; at = svg.find("<polyline", at + 1)) ++polylines;
  CHECK(polylines == 2);
  CHECK_THROWS_AS(curve_plot_svg({}), ValidationError);
}

TEST_CASE("datasets") {
  const auto dir = scratch("ds");
  save_image((dir / "b.png").string(), ImageTensor(1, 3, 3));
  save_image((dir / "a.ppm").string(), ImageTensor(3, 3, 3));
  write_text_file((dir / "notes.txt").string(), "ignored");
  SaliencyMap m;
  m.height = m.width = 3;
  m.scores.assign(9, 0.0);
  save_map((dir / "b.smap").string(), m);
  const auto ds = open_dataset(dir.string());
  REQUIRE(ds.entries.size() == 2);
  CHECK(ds.entries[0].image_id == "a");
  CHECK_FALSE(ds.entries[0].map_path.has_value());
  CHECK(ds.entries[1].image_id == "b");
  REQUIRE(ds.entries[1].map_path.has_value());
  CHECK(load_external_map(*ds.entries[1].map_path).method == Method::external);

  save_image((dir / "a.png").string(), ImageTensor(1, 3, 3));
  CHECK_THROWS_AS(open_dataset(dir.string()), ValidationError);
  CHECK_THROWS_AS(open_dataset(scratch("empty").string()), ValidationError);
  CHECK_THROWS_AS(open_dataset((dir / "missing").string()), IoError);
}
