#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "scb/image.hpp"
#include "scb/saliency.hpp"
#include "scb/scorer.hpp"

namespace scb {

enum class DeletionBaseline { black, channel_mean };
enum class InsertionStart { blur, black };
enum class Game { deletion, insertion };

std::string to_string(DeletionBaseline b);
std::string to_string(InsertionStart s);
std::string to_string(Game g);

struct GameConfig {
  std::size_t steps = 224;
  DeletionBaseline deletion_baseline = DeletionBaseline::black;
  InsertionStart insertion_start = InsertionStart::blur;
  double blur_sigma = 5.0;
  /// Step images per scorer call.
  std::size_t batch_size = 16;

  void validate() const;
};

struct CurvePoint {
  double fraction = 0.0;
  double probability = 0.0;
};

struct ProbabilityCurve {
  std::vector<CurvePoint> points;
  Game game = Game::deletion;
  std::size_t class_id = 0;

  /// Throws ValidationError unless fractions rise strictly from 0 to 1.
  void validate() const;
};

/// Flat pixel indices by descending score, ties by ascending row then column.
std::vector<std::size_t> rank_pixels(const SaliencyMap& map);

/// Image every deletion step converges to.
ImageTensor deletion_baseline_image(const ImageTensor& image, DeletionBaseline baseline);
/// Image the insertion game starts from.
ImageTensor insertion_start_image(const ImageTensor& image, const GameConfig& config);

/// Pixels changed after step k of `steps` over `pixels` pixels: ceil(k·pixels/steps).
constexpr std::size_t pixels_at_step(std::size_t k, std::size_t pixels, std::size_t steps) noexcept {
  return (k * pixels + steps - 1) / steps;
}

ProbabilityCurve deletion_curve(const ImageTensor& image, const SaliencyMap& map,
                                const Scorer& scorer, std::size_t class_id,
                                const GameConfig& config);
ProbabilityCurve insertion_curve(const ImageTensor& image, const SaliencyMap& map,
                                 const Scorer& scorer, std::size_t class_id,
                                 const GameConfig& config);

/// Trapezoidal area under the curve over [0,1].
double auc(const ProbabilityCurve& curve);

/// "fraction,probability" header plus one row per point, 9 significant digits.
std::string curve_csv(const ProbabilityCurve& curve);

}  // namespace scb
