#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <json.hpp>
#include <sstream>

#include "fixtures.hpp"
#include "scb/bytes.hpp"
#include "scb/cli.hpp"
#include "scb/digest.hpp"
#include "scb/io.hpp"
#include "scb/mask_file.hpp"
#include "scb/remote.hpp"
#include "scb/saliency.hpp"

using namespace scb;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "scb");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("scb_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string scene_png(const fs::path& dir, std::uint64_t seed, std::size_t size = 24) {
  const auto scene = test::object_scene(size, seed, 3, 3);
  const std::string path = (dir / ("scene" + std::to_string(seed) + ".png")).string();
  save_image(path, scene.image);
  return path;
}

json read_json(const fs::path& p) {
  const auto bytes = read_file_bytes(p.string());
  return json::parse(bytes.begin(), bytes.end());
}

const std::string kRegion = "region:6,6,18,18;0,0,8,24;16,0,24,24";

}  // namespace

TEST_CASE("parse_scorer") {
  const auto lin = parse_scorer("linear:random:5:3", 8, 9);
  CHECK(lin->n_classes() == 5);
  CHECK(lin->input_shape() == ImageShape{0, 8, 9});
  CHECK(parse_scorer("linear:random:5:3", 8, 9)->identity() == lin->identity());
  CHECK(parse_scorer("linear:random:5:4", 8, 9)->identity() != lin->identity());
  const auto reg = parse_scorer("region:0,0,2,2;1,1,4,4", 4, 4);
  CHECK(reg->n_classes() == 2);

  const auto dir = scratch("spec");
  write_text_file((dir / "lin.json").string(),
                  R"({"n_classes": 2, "height": 1, "width": 2, "weights": [1, 0, 0, 1], "link": "softmax"})");
  const auto file = parse_scorer("linear:@" + (dir / "lin.json").string(), 0, 0);
  CHECK(file->input_shape() == ImageShape{0, 1, 2});
  ImageTensor img(1, 1, 2);
  img.data = {1.0f, 0.0f};
  CHECK(file->score_one(img)[0] == doctest::Approx(std::exp(1.0) / (std::exp(1.0) + 1.0)));

  CHECK_THROWS_AS(parse_scorer("magic:1", 4, 4), ValidationError);
  CHECK_THROWS_AS(parse_scorer("linear:random:0", 4, 4), ValidationError);
  CHECK_THROWS_AS(parse_scorer("region:0,0,9,9", 4, 4), ValidationError);
  CHECK_THROWS_AS(parse_scorer("region:1,2,3", 4, 4), ValidationError);
  CHECK_THROWS_AS(parse_scorer("linear:@/nonexistent.json", 4, 4), IoError);
}

TEST_CASE("exit codes") {
  CHECK(cli({}).code == 2);
  CHECK(cli({"--help"}).code == 0);
  CHECK(cli({"frobnicate"}).code == 2);
  CHECK(cli({"masks", "--masks", "lots"}).code == 2);
  const auto dir = scratch("codes");
  const Run bad_p = cli({"masks", "--keep-prob", "1.5", "--out", dir.string()});
  CHECK(bad_p.code == 2);
  CHECK(bad_p.err.find("error:") == 0);
  CHECK(cli({"explain", "--image", (dir / "none.png").string(), "--scorer", "linear:random:3", "--size", "8x8"}).code == 2);
  CHECK(cli({"explain", "--image", scene_png(dir, 1), "--scorer", "remote:http://127.0.0.1:1", "--timeout-ms", "500"}).code == 3);
  CHECK(cli({"masks", "--memory-budget", "0", "--masks", "10", "--size", "8x8", "--out", dir.string()}).code == 0);
}

TEST_CASE("masks command writes an MSK1 file") {
  const auto dir = scratch("masks");
  const Run r = cli({"masks", "--masks", "40", "--grid", "4x4", "--keep-prob", "0.5", "--size", "12x16", "--seed", "9",
                     "--out", dir.string()});
  REQUIRE(r.code == 0);
  const MaskSet set = read_mask_file((dir / "masks.msk1").string());
  CHECK(set.size() == 40);
  CHECK(set.config().grid_h == 4);
  CHECK(set.config().target_h == 12);
  CHECK(set.config().target_w == 16);
  CHECK(set.config().keep_prob == doctest::Approx(0.5));
  CHECK(r.out.find("empirical keep rate") != std::string::npos);
  const auto again = scratch("masks2");
  cli({"masks", "--masks", "40", "--grid", "4x4", "--keep-prob", "0.5", "--size", "12x16", "--seed", "9", "--out",
       again.string()});
  CHECK(read_file_bytes((dir / "masks.msk1").string()) == read_file_bytes((again / "masks.msk1").string()));
}

TEST_CASE("explain is deterministic and reuses mask files") {
  const auto dir = scratch("explain");
  const std::string img = scene_png(dir, 3);
  auto run = [&](const std::string& out, const std::string& workers, std::vector<std::string> extra = {}) {
    std::vector<std::string> a = {"explain", "--image", img, "--scorer", kRegion, "--size", "24x24", "--masks", "300",
                                  "--seed", "4", "--workers", workers, "--out", out, "--heatmap"};
    a.insert(a.end(), extra.begin(), extra.end());
    return cli(a);
  };
  REQUIRE(run((dir / "a").string(), "1").code == 0);
  REQUIRE(run((dir / "b").string(), "8").code == 0);
  const auto smap_a = read_file_bytes((dir / "a" / "scene3_shape.smap").string());
  CHECK(smap_a == read_file_bytes((dir / "b" / "scene3_shape.smap").string()));
  CHECK(fs::exists(dir / "a" / "scene3_shape.png"));
  const json meta = read_json(dir / "a" / "scene3_shape.json");
  CHECK(meta["command"] == "explain");
  CHECK(meta["seed"] == 4);
  CHECK(meta["mask_config"]["count"] == 300);
  CHECK(meta["class_id"] == 0);
  CHECK(meta["config_digest"] == hex64(decode_smap(smap_a).config_digest));
  CHECK(read_json(dir / "b" / "scene3_shape.json") == meta);

  REQUIRE(cli({"masks", "--masks", "300", "--seed", "4", "--size", "24x24", "--out",
               (dir / "m").string()})
              .code == 0);
  REQUIRE(run((dir / "c").string(), "2", {"--mask-file", (dir / "m" / "masks.msk1").string()}).code == 0);
  CHECK(read_file_bytes((dir / "c" / "scene3_shape.smap").string()) == smap_a);

  REQUIRE(run((dir / "r").string(), "1", {"--method", "rise", "--class", "2"}).code == 0);
  const SaliencyMap rise = decode_smap(read_file_bytes((dir / "r" / "scene3_rise.smap").string()));
  CHECK(rise.method == Method::rise);
  CHECK(rise.class_id == 2);
}

TEST_CASE("evaluate writes curves, plots and AUCs") {
  const auto dir = scratch("evaluate");
  const std::string img = scene_png(dir, 5);
  REQUIRE(cli({"explain", "--image", img, "--scorer", kRegion, "--size", "24x24", "--masks", "200", "--out",
               (dir / "maps").string()})
              .code == 0);
  const std::string ext = (dir / "maps" / "scene5_shape.smap").string();
  const Run r = cli({"evaluate", "--image", img, "--scorer", kRegion, "--size", "24x24", "--masks", "200", "--method",
                     "shape", "--method", "rise", "--map", ext, "--steps", "12", "--out", (dir / "eval").string()});
  REQUIRE(r.code == 0);
  for (const char* f : {"shape_deletion.csv", "rise_insertion.csv", "scene5_shape_deletion.csv", "deletion.svg",
                        "insertion.svg", "auc.json"}) {
    CHECK_MESSAGE(fs::exists(dir / "eval" / f), f);
  }
  const json doc = read_json(dir / "eval" / "auc.json");
  REQUIRE(doc["results"].size() == 3);
  CHECK(doc["game_config"]["steps"] == 12);
  // Same masks and seed: the in-process SHAPE map equals the saved one.
  CHECK(doc["results"][0]["deletion_auc"] == doc["results"][2]["deletion_auc"]);
  const auto csv = read_file_bytes((dir / "eval" / "shape_deletion.csv").string());
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 14);
  CHECK(cli({"evaluate", "--image", img, "--scorer", kRegion, "--size", "24x24", "--out", dir.string()}).code == 2);
}

TEST_CASE("benchmark aggregates over a dataset") {
  const auto dir = scratch("bench");
  const auto ds = dir / "data";
  fs::create_directories(ds);
  for (std::uint64_t s = 0; s < 4; ++s) scene_png(ds, s, 16);
  SaliencyMap m;
  m.height = m.width = 16;
  m.scores.assign(256, 0.0);
  save_map((ds / "scene0.smap").string(), m);
  const Run r = cli({"benchmark", "--dataset", ds.string(), "--scorer", "region:4,4,12,12;0,0,16,4", "--size", "16x16",
                     "--masks", "100", "--steps", "8", "--method", "shape", "--method", "rise", "--method", "external",
                     "--count", "3", "--out", (dir / "out").string()});
  REQUIRE(r.code == 0);
  const json doc = read_json(dir / "out" / "report.json");
  CHECK(doc["images"] == 3);
  CHECK(doc["per_image"].size() == 9);
  REQUIRE(doc["aggregate"].size() == 3);
  CHECK(doc["aggregate"][0]["method"] == "shape");
  CHECK(doc["aggregate"][0]["evaluated"] == 3);
  CHECK(doc["aggregate"][2]["evaluated"].get<int>() + doc["aggregate"][2]["excluded"].get<int>() == 3);
  CHECK(fs::exists(dir / "out" / "report.txt"));
  CHECK(r.out.find("Insertion") != std::string::npos);
}

TEST_CASE("selftest passes") {
  const Run r = cli({"selftest"});
  CHECK(r.code == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);
}

TEST_CASE("SCB_ENDPOINT supplies the default remote scorer") {
  const auto scene = test::object_scene(16, 2, 3, 3);
  ProtocolServer server(region_mean_scorer(scene.spec));
  server.start();
  const auto dir = scratch("endpoint");
  save_image((dir / "s.png").string(), scene.image);
  ::setenv("SCB_ENDPOINT", server.endpoint().c_str(), 1);
  const Run remote = cli({"explain", "--image", (dir / "s.png").string(), "--masks", "50", "--out", (dir / "r").string()});
  ::unsetenv("SCB_ENDPOINT");
  REQUIRE(remote.code == 0);
  CHECK(cli({"explain", "--image", (dir / "s.png").string(), "--masks", "50", "--out", (dir / "r").string()}).code == 2);
  const SaliencyMap got = decode_smap(read_file_bytes((dir / "r" / "s_shape.smap").string()));
  CHECK(got.height == 16);
  // Same answer as the in-process scorer over the same masks.
  MaskConfig c;
  c.target_h = c.target_w = 16;
  c.count = 50;
  c.seed = derive_seed(0, "masks");
  const SaliencyMap local =
      shape_scores(load_image((dir / "s.png").string(), 16, 16), generate_mask_set(c), *region_mean_scorer(scene.spec), 0);
  for (std::size_t i = 0; i < 256; ++i) CHECK(got.scores[i] == doctest::Approx(local.scores[i]).epsilon(1e-5));
  server.stop();
}
