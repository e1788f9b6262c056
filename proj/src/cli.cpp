#include "scb/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "scb/benchmark.hpp"
#include "scb/bytes.hpp"
#include "scb/digest.hpp"
#include "scb/errors.hpp"
#include "scb/io.hpp"
#include "scb/mask_file.hpp"
#include "scb/remote.hpp"
#include "scb/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace scb {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) parts.push_back(cur);
  return parts;
}

std::size_t parse_count(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ValidationError(std::string("bad ") + what + " '" + s + "'");
  }
}

std::pair<std::size_t, std::size_t> parse_dims(const std::string& s, const char* what) {
  const auto x = s.find_first_of("xX");
  if (x == std::string::npos) throw ValidationError(std::string(what) + " must look like HxW, got '" + s + "'");
  return {parse_count(s.substr(0, x), what), parse_count(s.substr(x + 1), what)};
}

json read_json_file(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception& e) {
    throw ValidationError("cannot parse " + path + ": " + e.what());
  }
}

Rect rect_from(const std::vector<std::size_t>& v) {
  if (v.size() != 4) throw ValidationError("a region needs 4 coordinates y0,x0,y1,x1");
  return {v[0], v[1], v[2], v[3]};
}

}  // namespace

ScorerPtr parse_scorer(const std::string& spec, std::size_t height, std::size_t width,
                       int timeout_ms, std::size_t remote_batch) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw ValidationError("scorer must be linear:SPEC, region:SPEC or remote:URL");
  const std::string kind = spec.substr(0, colon);
  const std::string rest = spec.substr(colon + 1);
  if (kind == "remote") {
    return remote_scorer(rest, std::chrono::milliseconds(timeout_ms), remote_batch);
  }
  if (kind == "linear") {
    if (rest.rfind("random:", 0) == 0) {
      const auto parts = split(rest.substr(7), ':');
      if (parts.empty() || parts.size() > 2) throw ValidationError("linear:random:K[:SEED]");
      const std::size_t k = parse_count(parts[0], "class count");
      const std::uint64_t seed = parts.size() == 2 ? parse_count(parts[1], "weight seed") : 0;
      return linear_softmax_scorer(random_linear_spec(k, height, width, seed));
    }
    if (rest.rfind('@', 0) == 0) {
      const json j = read_json_file(rest.substr(1));
      SyntheticSpec s;
      s.kind = SyntheticKind::linear_softmax;
      try {
        s.n_classes = j.at("n_classes").get<std::size_t>();
        s.height = j.value("height", height);
        s.width = j.value("width", width);
        s.weights = j.at("weights").get<std::vector<double>>();
        s.link = j.value("link", std::string("softmax")) == "identity" ? Link::identity : Link::softmax;
      } catch (const json::exception& e) {
        throw ValidationError(std::string("bad linear scorer file: ") + e.what());
      }
      return linear_softmax_scorer(s);
    }
    throw ValidationError("linear scorer spec must be random:K[:SEED] or @FILE.json");
  }
  if (kind == "region") {
    SyntheticSpec s;
    s.kind = SyntheticKind::region_mean;
    s.height = height;
    s.width = width;
    if (rest.rfind('@', 0) == 0) {
      const json j = read_json_file(rest.substr(1));
      try {
        s.height = j.value("height", height);
        s.width = j.value("width", width);
        for (const auto& r : j.at("regions")) s.regions.push_back(rect_from(r.get<std::vector<std::size_t>>()));
      } catch (const json::exception& e) {
        throw ValidationError(std::string("bad region scorer file: ") + e.what());
      }
    } else {
      for (const auto& r : split(rest, ';')) {
        std::vector<std::size_t> v;
        for (const auto& n : split(r, ',')) v.push_back(parse_count(n, "region coordinate"));
        s.regions.push_back(rect_from(v));
      }
    }
    return region_mean_scorer(s);
  }
  throw ValidationError("unknown scorer kind '" + kind + "'");
}

namespace {

struct Options {
  std::uint64_t seed = 0;
  std::size_t masks = 6000;
  std::string grid = "7x7";
  double keep_prob = 0.1;
  std::size_t steps = 224;
  std::vector<std::string> methods;
  std::vector<std::string> maps;
  std::string scorer;
  std::string dataset;
  std::string out = ".";
  int workers = 0;
  std::string deletion_baseline = "black";
  std::string insertion_start = "blur";
  double blur_sigma = 5.0;
  std::string image;
  std::string size = "224x224";
  long class_id = -1;
  bool heatmap = false;
  bool no_upsample = false;
  bool analytic_norm = false;
  bool fresh_masks = false;
  std::string mask_file;
  std::size_t memory_budget_mb = kDefaultMaskBudgetBytes >> 20;
  std::size_t batch_size = 16;
  int timeout_ms = 30000;
  std::size_t count = 0;
};

void add_mask_options(CLI::App* app, Options& o) {
  app->add_option("--seed", o.seed, "64-bit seed all randomness derives from");
  app->add_option("--masks", o.masks, "number of random masks");
  app->add_option("--grid", o.grid, "mask grid size HxW");
  app->add_option("--keep-prob", o.keep_prob, "probability that a grid cell keeps its pixels");
  app->add_flag("--no-upsample", o.no_upsample, "use grids at image resolution (grid must equal size)");
  app->add_option("--mask-file", o.mask_file, "use masks from an MSK1 file");
  app->add_option("--memory-budget", o.memory_budget_mb, "MiB allowed for materialized masks");
  app->add_option("--workers", o.workers, "worker threads (0 = all cores)");
  app->add_option("--batch-size", o.batch_size, "images per scorer call");
}

void add_scorer_options(CLI::App* app, Options& o) {
  app->add_option("--scorer", o.scorer, "linear:SPEC | region:SPEC | remote:URL (default remote:$SCB_ENDPOINT)");
  app->add_option("--size", o.size, "input size HxW for synthetic scorers");
  app->add_option("--timeout-ms", o.timeout_ms, "remote scorer timeout");
}

void add_game_options(CLI::App* app, Options& o) {
  app->add_option("--steps", o.steps, "curve points after the start");
  app->add_option("--deletion-baseline", o.deletion_baseline, "black | channel-mean")
      ->check(CLI::IsMember({"black", "channel-mean"}));
  app->add_option("--insertion-start", o.insertion_start, "blur | black")->check(CLI::IsMember({"blur", "black"}));
  app->add_option("--blur-sigma", o.blur_sigma, "Gaussian sigma of the insertion start image");
}

MaskConfig mask_config(const Options& o, std::size_t h, std::size_t w) {
  MaskConfig c;
  std::tie(c.grid_h, c.grid_w) = parse_dims(o.grid, "--grid");
  c.keep_prob = o.keep_prob;
  c.count = o.masks;
  c.target_h = h;
  c.target_w = w;
  c.seed = derive_seed(o.seed, "masks");
  c.upsample = !o.no_upsample;
  c.validate();
  return c;
}

GameConfig game_config(const Options& o) {
  GameConfig g;
  g.steps = o.steps;
  g.deletion_baseline = o.deletion_baseline == "black" ? DeletionBaseline::black : DeletionBaseline::channel_mean;
  g.insertion_start = o.insertion_start == "blur" ? InsertionStart::blur : InsertionStart::black;
  g.blur_sigma = o.blur_sigma;
  g.batch_size = o.batch_size;
  g.validate();
  return g;
}

EstimatorOptions estimator_options(const Options& o) {
  EstimatorOptions e;
  e.workers = o.workers;
  e.batch_size = o.batch_size;
  e.normalization = o.analytic_norm ? Normalization::analytic : Normalization::empirical;
  return e;
}

ScorerPtr resolve_scorer(const Options& o) {
  std::string spec = o.scorer;
  if (spec.empty()) {
    const char* env = std::getenv("SCB_ENDPOINT");
    if (!env || !*env) throw ValidationError("no --scorer given and SCB_ENDPOINT is unset");
    spec = std::string("remote:") + env;
  }
  const auto [h, w] = parse_dims(o.size, "--size");
  return parse_scorer(spec, h, w, o.timeout_ms);
}

MaskSet obtain_masks(const Options& o, std::size_t h, std::size_t w) {
  if (!o.mask_file.empty()) {
    MaskSet s = read_mask_file(o.mask_file);
    if (s.config().target_h != h || s.config().target_w != w) {
      throw ValidationError("mask file resolution does not match the scorer input");
    }
    return s;
  }
  return generate_mask_set(mask_config(o, h, w), MaskStorage::automatic, o.memory_budget_mb << 20, o.workers);
}

/// Provenance block stamped into every JSON output. Excludes the worker
/// count, which never changes results.
json provenance(const Options& o, const std::string& command, const Scorer& scorer, const MaskConfig& masks) {
  return {{"artifact_version", kArtifactVersion},
          {"command", command},
          {"seed", o.seed},
          {"scorer", scorer.identity()},
          {"mask_config", mask_config_json(masks)},
          {"config_digest", hex64(config_digest(masks, scorer.identity()))},
          {"normalization", o.analytic_norm ? "analytic" : "empirical"}};
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

std::size_t pick_class(const Options& o, const Scorer& scorer, const ImageTensor& image) {
  if (o.class_id >= 0) {
    if (static_cast<std::size_t>(o.class_id) >= scorer.n_classes()) throw ValidationError("--class out of range");
    return static_cast<std::size_t>(o.class_id);
  }
  return argmax(scorer.score_one(image));
}

int cmd_masks(const Options& o, std::ostream& out) {
  const auto [h, w] = parse_dims(o.size, "--size");
  const MaskSet set = generate_mask_set(mask_config(o, h, w), MaskStorage::automatic, o.memory_budget_mb << 20, o.workers);
  ensure_dir(o.out);
  const std::string path = join(o.out, "masks.msk1");
  write_mask_file(path, set);
  double kept = 0.0;
  std::vector<float> m(set.pixels());
  for (std::size_t i = 0; i < set.size(); ++i) {
    set.fill(i, m);
    for (float v : m) kept += v;
  }
  const double rate = kept / static_cast<double>(set.size() * set.pixels());
  const auto& c = set.config();
  out << "wrote " << path << "\n"
      << "count: " << c.count << "\n"
      << "grid: " << c.grid_h << "x" << c.grid_w << "\n"
      << "target: " << c.target_h << "x" << c.target_w << "\n"
      << "upsample: " << (c.upsample ? "yes" : "no") << "\n"
      << "empirical keep rate: " << rate << " (keep_prob " << c.keep_prob << ")\n";
  return 0;
}

int cmd_explain(const Options& o, std::ostream& out) {
  const auto scorer = resolve_scorer(o);
  const ImageShape shape = scorer->input_shape();
  if (o.image.empty()) throw ValidationError("--image is required");
  const ImageTensor image = load_image(o.image, shape.height, shape.width);
  const std::string method = o.methods.empty() ? "shape" : o.methods.front();
  if (method != "shape" && method != "rise") throw ValidationError("explain supports --method shape|rise");
  const std::size_t cls = pick_class(o, *scorer, image);
  const MaskSet masks = obtain_masks(o, shape.height, shape.width);
  const EstimatorOptions eo = estimator_options(o);
  const SaliencyMap map = method == "shape" ? shape_scores(image, masks, *scorer, cls, eo)
                                            : rise_scores(image, masks, *scorer, cls, eo);
  ensure_dir(o.out);
  const std::string stem = image.image_id + "_" + method;
  save_map(join(o.out, stem + ".smap"), map);
  json meta = provenance(o, "explain", *scorer, masks.config());
  meta["image_id"] = image.image_id;
  meta["method"] = method;
  meta["class_id"] = cls;
  meta["degenerate_pixels"] = map.degenerate_pixels;
  write_text_file(join(o.out, stem + ".json"), meta.dump(2) + "\n");
  if (o.heatmap) render_heatmap(image, map, join(o.out, stem + ".png"));
  out << "class " << cls << ", method " << method << ", digest " << hex64(map.config_digest) << "\n"
      << "wrote " << join(o.out, stem + ".smap") << "\n";
  if (map.degenerate_pixels) out << "degenerate pixels: " << map.degenerate_pixels << "\n";
  return 0;
}

int cmd_evaluate(const Options& o, std::ostream& out) {
  const auto scorer = resolve_scorer(o);
  const ImageShape shape = scorer->input_shape();
  if (o.image.empty()) throw ValidationError("--image is required");
  if (o.methods.empty() && o.maps.empty()) throw ValidationError("give --method and/or --map");
  const ImageTensor image = load_image(o.image, shape.height, shape.width);
  const std::size_t cls = pick_class(o, *scorer, image);
  const GameConfig game = game_config(o);

  std::vector<std::pair<std::string, SaliencyMap>> maps;
  MaskSet masks;
  bool have_masks = false;
  for (const auto& m : o.methods) {
    if (m == "external") continue;
    if (m != "shape" && m != "rise") throw ValidationError("--method must be shape, rise or external");
    if (!have_masks) {
      masks = obtain_masks(o, shape.height, shape.width);
      have_masks = true;
    }
    const EstimatorOptions eo = estimator_options(o);
    maps.emplace_back(m, m == "shape" ? shape_scores(image, masks, *scorer, cls, eo)
                                      : rise_scores(image, masks, *scorer, cls, eo));
  }
  for (const auto& path : o.maps) {
    SaliencyMap m = load_external_map(path);
    if (m.height != image.height || m.width != image.width) {
      throw ValidationError("map " + path + " does not match the image size");
    }
    maps.emplace_back(fs::path(path).stem().string(), std::move(m));
  }

  ensure_dir(o.out);
  std::vector<LabeledCurve> del_curves;
  std::vector<LabeledCurve> ins_curves;
  json results = json::array();
  for (const auto& [label, map] : maps) {
    const auto del = deletion_curve(image, map, *scorer, cls, game);
    const auto ins = insertion_curve(image, map, *scorer, cls, game);
    write_text_file(join(o.out, label + "_deletion.csv"), curve_csv(del));
    write_text_file(join(o.out, label + "_insertion.csv"), curve_csv(ins));
    const double a_del = auc(del);
    const double a_ins = auc(ins);
    results.push_back({{"map", label}, {"insertion_auc", a_ins}, {"deletion_auc", a_del}});
    out << label << ": insertion AUC " << a_ins << ", deletion AUC " << a_del << "\n";
    del_curves.push_back({label, del});
    ins_curves.push_back({label, ins});
  }
  export_curve_plot(del_curves, join(o.out, "deletion.svg"), "Deletion game (lower AUC is better)");
  export_curve_plot(ins_curves, join(o.out, "insertion.svg"), "Insertion game (higher AUC is better)");
  MaskConfig mc = have_masks ? masks.config() : mask_config(o, shape.height, shape.width);
  json doc = provenance(o, "evaluate", *scorer, mc);
  doc["image_id"] = image.image_id;
  doc["class_id"] = cls;
  doc["game_config"] = game_config_json(game);
  doc["results"] = results;
  write_text_file(join(o.out, "auc.json"), doc.dump(2) + "\n");
  return 0;
}

int cmd_benchmark(const Options& o, std::ostream& out) {
  const auto scorer = resolve_scorer(o);
  if (o.dataset.empty()) throw ValidationError("--dataset is required");
  const DatasetHandle ds = open_dataset(o.dataset);
  std::vector<Method> methods;
  for (const auto& m : o.methods.empty() ? std::vector<std::string>{"shape", "rise"} : o.methods) {
    const Method parsed = parse_method(m);
    if (parsed == Method::exact) throw ValidationError("exact is not a benchmark method");
    methods.push_back(parsed);
  }
  BenchmarkConfig bc;
  const ImageShape shape = scorer->input_shape();
  bc.masks = mask_config(o, shape.height, shape.width);
  bc.game = game_config(o);
  bc.estimator = estimator_options(o);
  bc.mask_budget_bytes = o.memory_budget_mb << 20;
  bc.fresh_masks = o.fresh_masks;
  bc.count = o.count;
  bc.seed = o.seed;
  const EvalReport report = run_benchmark(ds, methods, *scorer, bc);
  ensure_dir(o.out);
  json doc = report_json(report);
  doc["command"] = "benchmark";
  write_text_file(join(o.out, "report.json"), doc.dump(2) + "\n");
  const std::string table = report_table(report);
  write_text_file(join(o.out, "report.txt"), table);
  out << table;
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Black-box saliency generation (SHAPE, RISE) and insertion/deletion evaluation"};
  app.require_subcommand(1);
  Options o;

  auto* masks = app.add_subcommand("masks", "generate a random mask set and write it as MSK1");
  add_mask_options(masks, o);
  masks->add_option("--size", o.size, "mask resolution HxW");
  masks->add_option("--out", o.out, "output directory");

  auto* explain = app.add_subcommand("explain", "compute a saliency map for one image");
  add_mask_options(explain, o);
  add_scorer_options(explain, o);
  explain->add_option("--image", o.image, "PNG or PPM input")->required();
  explain->add_option("--method", o.methods, "shape | rise")->expected(1);
  explain->add_option("--class", o.class_id, "class to explain (default: top-1)");
  explain->add_option("--out", o.out, "output directory");
  explain->add_flag("--heatmap", o.heatmap, "also write a PNG overlay");
  explain->add_flag("--analytic-norm", o.analytic_norm, "normalize by (1-p)N instead of per-pixel weights");

  auto* evaluate = app.add_subcommand("evaluate", "run the insertion and deletion games for one image");
  add_mask_options(evaluate, o);
  add_scorer_options(evaluate, o);
  add_game_options(evaluate, o);
  evaluate->add_option("--image", o.image, "PNG or PPM input")->required();
  evaluate->add_option("--method", o.methods, "shape | rise | external (repeatable)");
  evaluate->add_option("--map", o.maps, "SMAP file to evaluate (repeatable)");
  evaluate->add_option("--class", o.class_id, "class to evaluate (default: top-1)");
  evaluate->add_option("--out", o.out, "output directory");
  evaluate->add_flag("--analytic-norm", o.analytic_norm, "normalize by (1-p)N instead of per-pixel weights");

  auto* bench = app.add_subcommand("benchmark", "mean insertion/deletion AUC per method over a dataset");
  add_mask_options(bench, o);
  add_scorer_options(bench, o);
  add_game_options(bench, o);
  bench->add_option("--dataset", o.dataset, "directory of images (+ optional <stem>.smap maps)")->required();
  bench->add_option("--method", o.methods, "shape | rise | external (repeatable)");
  bench->add_option("--count", o.count, "images to sample (0 = all)");
  bench->add_option("--out", o.out, "output directory");
  bench->add_flag("--fresh-masks", o.fresh_masks, "draw a new mask set per image");
  bench->add_flag("--analytic-norm", o.analytic_norm, "normalize by (1-p)N instead of per-pixel weights");

  auto* selftest = app.add_subcommand("selftest", "run the desk-scale oracle checks");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*masks) return cmd_masks(o, out);
    if (*explain) return cmd_explain(o, out);
    if (*evaluate) return cmd_evaluate(o, out);
    if (*bench) return cmd_benchmark(o, out);
    if (*selftest) return run_selftest(out) ? 0 : 4;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 4;
  }
  return 2;
}

}  // namespace scb
