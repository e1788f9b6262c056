#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "scb/io.hpp"
#include "scb/mask.hpp"
#include "scb/metrics.hpp"
#include "scb/saliency.hpp"
#include "scb/scorer.hpp"

namespace scb {

inline constexpr const char* kArtifactVersion = "1.0.0";

struct BenchmarkConfig {
  MaskConfig masks;
  GameConfig game;
  EstimatorOptions estimator;
  MaskStorage storage = MaskStorage::automatic;
  std::size_t mask_budget_bytes = kDefaultMaskBudgetBytes;
  /// Draw a separate mask set per image instead of reusing one set.
  bool fresh_masks = false;
  /// Number of images to sample from the dataset; 0 = all.
  std::size_t count = 0;
  std::uint64_t seed = 0;
};

struct ImageResult {
  std::string image_id;
  Method method = Method::shape;
  std::size_t class_id = 0;
  double insertion_auc = 0.0;
  double deletion_auc = 0.0;
  std::optional<std::string> error;  // set when the image was excluded
};

struct MethodSummary {
  Method method = Method::shape;
  double mean_insertion = 0.0;
  double mean_deletion = 0.0;
  std::size_t evaluated = 0;
  std::size_t excluded = 0;
};

struct EvalReport {
  std::vector<ImageResult> per_image;
  std::vector<MethodSummary> aggregate;
  std::string scorer_identity;
  BenchmarkConfig config;
  std::uint64_t mask_digest = 0;
  std::size_t images = 0;
};

/// Insertion and deletion AUC of every method on every sampled image, for
/// the scorer's top-1 class on the unperturbed image.
EvalReport run_benchmark(const DatasetHandle& dataset, const std::vector<Method>& methods,
                         const Scorer& scorer, const BenchmarkConfig& config);

/// Per-method means over the non-excluded rows of `rows`.
std::vector<MethodSummary> summarize(const std::vector<ImageResult>& rows,
                                     const std::vector<Method>& methods);

nlohmann::json game_config_json(const GameConfig& g);
nlohmann::json mask_config_json(const MaskConfig& m);
nlohmann::json report_json(const EvalReport& report);
/// Aligned plain-text table: one row per method, insertion and deletion columns.
std::string report_table(const EvalReport& report);

}  // namespace scb
