#include "scb/benchmark.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "scb/digest.hpp"
#include "scb/errors.hpp"
#include "scb/rng.hpp"

namespace scb {

using nlohmann::json;

namespace {

std::vector<std::size_t> sample_indices(std::size_t total, std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> idx(total);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (count == 0 || count >= total) return idx;
  CounterStream stream(derive_seed(seed, "dataset-sample"), 0);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(stream.below(total - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

std::vector<MethodSummary> summarize(const std::vector<ImageResult>& rows,
                                     const std::vector<Method>& methods) {
  std::vector<MethodSummary> out;
  for (Method m : methods) {
    MethodSummary s;
    s.method = m;
    double ins = 0.0;
    double del = 0.0;
    for (const auto& r : rows) {
      if (r.method != m) continue;
      if (r.error) {
        ++s.excluded;
        continue;
      }
      ins += r.insertion_auc;
      del += r.deletion_auc;
      ++s.evaluated;
    }
    if (s.evaluated > 0) {
      s.mean_insertion = ins / static_cast<double>(s.evaluated);
      s.mean_deletion = del / static_cast<double>(s.evaluated);
    }
    out.push_back(s);
  }
  return out;
}

EvalReport run_benchmark(const DatasetHandle& dataset, const std::vector<Method>& methods,
                         const Scorer& scorer, const BenchmarkConfig& config) {
  if (dataset.entries.empty()) throw ValidationError("dataset is empty");
  if (methods.empty()) throw ValidationError("no methods to benchmark");
  for (Method m : methods) {
    if (m == Method::exact) throw ValidationError("exact maps are not a benchmark method");
  }
  config.game.validate();
  const ImageShape shape = scorer.input_shape();
  MaskConfig mc = config.masks;
  mc.target_h = shape.height;
  mc.target_w = shape.width;
  mc.validate();

  EvalReport report;
  report.config = config;
  report.config.masks = mc;
  report.scorer_identity = scorer.identity();
  report.mask_digest = config_digest(mc, scorer.identity());

  const bool needs_masks = std::any_of(methods.begin(), methods.end(),
                                       [](Method m) { return m == Method::shape || m == Method::rise; });
  MaskSet shared;
  if (needs_masks && !config.fresh_masks) {
    shared = generate_mask_set(mc, config.storage, config.mask_budget_bytes, config.estimator.workers);
  }

  const auto picks = sample_indices(dataset.entries.size(), config.count, config.seed);
  report.images = picks.size();
  for (std::size_t n = 0; n < picks.size(); ++n) {
    const DatasetEntry& entry = dataset.entries[picks[n]];
    const ImageTensor image = load_image(entry.path, shape.height, shape.width);
    const auto probs = scorer.score_one(image);
    const std::size_t cls = argmax(probs);

    MaskSet fresh;
    if (needs_masks && config.fresh_masks) {
      MaskConfig per = mc;
      per.seed = derive_seed(mc.seed, "image-masks", picks[n]);
      fresh = generate_mask_set(per, config.storage, config.mask_budget_bytes, config.estimator.workers);
    }
    const MaskSet& masks = config.fresh_masks ? fresh : shared;

    for (Method m : methods) {
      ImageResult row;
      row.image_id = entry.image_id;
      row.method = m;
      row.class_id = cls;
      SaliencyMap map;
      try {
        switch (m) {
          case Method::shape: map = shape_scores(image, masks, scorer, cls, config.estimator); break;
          case Method::rise: map = rise_scores(image, masks, scorer, cls, config.estimator); break;
          default:
            if (!entry.map_path) throw IoError("no external map for image " + entry.image_id);
            map = load_external_map(*entry.map_path);
            if (map.height != image.height || map.width != image.width) {
              throw ValidationError("external map is " + std::to_string(map.height) + "x" +
                                    std::to_string(map.width) + ", image is " +
                                    std::to_string(image.height) + "x" + std::to_string(image.width));
            }
            break;
        }
      } catch (const IoError& e) {
        row.error = e.what();
      } catch (const FormatError& e) {
        row.error = e.what();
      } catch (const ValidationError& e) {
        if (m != Method::external) throw;
        row.error = e.what();
      }
      if (!row.error) {
        row.insertion_auc = auc(insertion_curve(image, map, scorer, cls, config.game));
        row.deletion_auc = auc(deletion_curve(image, map, scorer, cls, config.game));
      }
      report.per_image.push_back(std::move(row));
    }
  }
  report.aggregate = summarize(report.per_image, methods);
  return report;
}

json game_config_json(const GameConfig& g) {
  return {{"steps", g.steps},
          {"deletion_baseline", to_string(g.deletion_baseline)},
          {"insertion_start", to_string(g.insertion_start)},
          {"blur_sigma", g.blur_sigma},
          {"tie_break", "score desc, row asc, col asc"}};
}

json mask_config_json(const MaskConfig& m) {
  return {{"grid", {m.grid_h, m.grid_w}},   {"keep_prob", m.keep_prob},
          {"count", m.count},               {"target", {m.target_h, m.target_w}},
          {"seed", m.seed},                 {"upsample", m.upsample}};
}

json report_json(const EvalReport& r) {
  json rows = json::array();
  for (const auto& row : r.per_image) {
    json j = {{"image_id", row.image_id}, {"method", to_string(row.method)}, {"class_id", row.class_id}};
    if (row.error) {
      j["error"] = *row.error;
    } else {
      j["insertion_auc"] = row.insertion_auc;
      j["deletion_auc"] = row.deletion_auc;
    }
    rows.push_back(std::move(j));
  }
  json agg = json::array();
  for (const auto& s : r.aggregate) {
    agg.push_back({{"method", to_string(s.method)},
                   {"mean_insertion_auc", s.mean_insertion},
                   {"mean_deletion_auc", s.mean_deletion},
                   {"evaluated", s.evaluated},
                   {"excluded", s.excluded}});
  }
  return {{"artifact_version", kArtifactVersion},
          {"seed", r.config.seed},
          {"scorer", r.scorer_identity},
          {"mask_config", mask_config_json(r.config.masks)},
          {"mask_config_digest", hex64(r.mask_digest)},
          {"fresh_masks", r.config.fresh_masks},
          {"normalization", r.config.estimator.normalization == Normalization::empirical ? "empirical" : "analytic"},
          {"game_config", game_config_json(r.config.game)},
          {"images", r.images},
          {"per_image", rows},
          {"aggregate", agg}};
}

std::string report_table(const EvalReport& r) {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-10s | %-9s | %-9s | %s\n", "Method", "Insertion", "Deletion", "Images");
  os << "scorer: " << r.scorer_identity << "\n" << buf;
  os << std::string(11, '-') << "+" << std::string(11, '-') << "+" << std::string(11, '-') << "+"
     << std::string(8, '-') << "\n";
  for (const auto& s : r.aggregate) {
    std::string count = std::to_string(s.evaluated);
    if (s.excluded) count += " (" + std::to_string(s.excluded) + " excluded)";
    std::snprintf(buf, sizeof buf, "%-10s | %9.4f | %9.4f | %s\n", to_string(s.method).c_str(),
                  s.mean_insertion, s.mean_deletion, count.c_str());
    os << buf;
  }
  os << "(insertion: higher is better; deletion: lower is better)\n";
  return os.str();
}

}  // namespace scb
