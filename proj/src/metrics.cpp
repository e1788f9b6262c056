#include "scb/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "scb/errors.hpp"

namespace scb {

std::string to_string(DeletionBaseline b) {
  return b == DeletionBaseline::black ? "black" : "channel-mean";
}
std::string to_string(InsertionStart s) { return s == InsertionStart::blur ? "blur" : "black"; }
std::string to_string(Game g) { return g == Game::deletion ? "deletion" : "insertion"; }

void GameConfig::validate() const {
  if (steps == 0) throw ValidationError("steps must be at least 1");
  if (insertion_start == InsertionStart::blur && !(blur_sigma > 0.0)) {
    throw ValidationError("blur sigma must be positive");
  }
  if (batch_size == 0) throw ValidationError("batch size must be positive");
}

void ProbabilityCurve::validate() const {
  if (points.size() < 2) throw ValidationError("curve needs at least 2 points");
  if (points.front().fraction != 0.0) throw ValidationError("curve must start at fraction 0");
  if (points.back().fraction != 1.0) throw ValidationError("curve must end at fraction 1");
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (!(points[i].fraction > points[i - 1].fraction)) {
      throw ValidationError("curve fractions must increase strictly (point " + std::to_string(i) + ")");
    }
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!(points[i].probability >= 0.0 && points[i].probability <= 1.0)) {
      throw ValidationError("curve probability outside [0,1] at point " + std::to_string(i));
    }
  }
}

std::vector<std::size_t> rank_pixels(const SaliencyMap& map) {
  if (map.scores.size() != map.height * map.width) {
    throw ValidationError("saliency map size does not match its dimensions");
  }
  for (std::size_t i = 0; i < map.scores.size(); ++i) {
    if (!std::isfinite(map.scores[i])) {
      throw ValidationError("non-finite saliency score at (" + std::to_string(i / map.width) + ", " +
                            std::to_string(i % map.width) + ")");
    }
  }
  std::vector<std::size_t> order(map.scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Flat index order is row-major, so a stable sort realises the tie-break.
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return map.scores[a] > map.scores[b]; });
  return order;
}

ImageTensor deletion_baseline_image(const ImageTensor& image, DeletionBaseline baseline) {
  ImageTensor out(image.channels, image.height, image.width, 0.0f);
  out.image_id = image.image_id;
  if (baseline == DeletionBaseline::channel_mean) {
    for (std::size_t c = 0; c < image.channels; ++c) {
      const auto plane = image.plane(c);
      const double mean = std::accumulate(plane.begin(), plane.end(), 0.0) /
                          static_cast<double>(plane.size());
      auto dst = out.plane(c);
      std::fill(dst.begin(), dst.end(), static_cast<float>(mean));
    }
  }
  return out;
}

ImageTensor insertion_start_image(const ImageTensor& image, const GameConfig& config) {
  if (config.insertion_start == InsertionStart::blur) return gaussian_blur(image, config.blur_sigma);
  return deletion_baseline_image(image, DeletionBaseline::black);
}

namespace {

/// Walks the ranking from `start`, copying pixels of `target` in order and
/// scoring the image after every step.
ProbabilityCurve play(Game game, ImageTensor current, const ImageTensor& target,
                      const SaliencyMap& map, const Scorer& scorer, std::size_t class_id,
                      const GameConfig& config) {
  config.validate();
  if (map.height != target.height || map.width != target.width) {
    throw ValidationError("saliency map is " + std::to_string(map.height) + "x" +
                          std::to_string(map.width) + ", image is " +
                          std::to_string(target.height) + "x" + std::to_string(target.width));
  }
  scorer.check_input({target.channels, target.height, target.width});
  if (class_id >= scorer.n_classes()) throw ValidationError("class out of range");

  const auto order = rank_pixels(map);
  const std::size_t pixels = target.pixels();
  const std::size_t volume = target.data.size();
  const std::size_t steps = config.steps;

  ProbabilityCurve curve;
  curve.game = game;
  curve.class_id = class_id;
  curve.points.resize(steps + 1);

  std::vector<float> batch;
  batch.reserve(config.batch_size * volume);
  std::size_t pending_from = 0;  // first step index held in `batch`
  auto context = [&] { return to_string(game) + " step " + std::to_string(pending_from) + ": "; };
  auto flush = [&](std::size_t next_step) {
    const std::size_t n = next_step - pending_from;
    if (n == 0) return;
    ScoreRows rows;
    try {
      rows = scorer.score({{target.channels, target.height, target.width}, n, batch});
    } catch (const TransportError& e) {
      throw TransportError(context() + e.what());
    } catch (const ProtocolError& e) {
      throw ProtocolError(context() + e.what());
    } catch (const ContractViolation& e) {
      throw ContractViolation(context() + e.what(), e.row());
    }
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t k = pending_from + j;
      curve.points[k] = {static_cast<double>(k) / static_cast<double>(steps), rows.at(j).at(class_id)};
    }
    batch.clear();
    pending_from = next_step;
  };

  std::size_t done = 0;
  for (std::size_t k = 0; k <= steps; ++k) {
    const std::size_t upto = k == 0 ? 0 : pixels_at_step(k, pixels, steps);
    for (; done < upto; ++done) {
      const std::size_t p = order[done];
      for (std::size_t c = 0; c < target.channels; ++c) {
        current.data[c * pixels + p] = target.data[c * pixels + p];
      }
    }
    batch.insert(batch.end(), current.data.begin(), current.data.end());
    if (k + 1 - pending_from == config.batch_size) flush(k + 1);
  }
  flush(steps + 1);
  curve.points.back().fraction = 1.0;
  return curve;
}

}  // namespace

ProbabilityCurve deletion_curve(const ImageTensor& image, const SaliencyMap& map,
                                const Scorer& scorer, std::size_t class_id,
                                const GameConfig& config) {
  image.validate();
  return play(Game::deletion, image, deletion_baseline_image(image, config.deletion_baseline), map,
              scorer, class_id, config);
}

ProbabilityCurve insertion_curve(const ImageTensor& image, const SaliencyMap& map,
                                 const Scorer& scorer, std::size_t class_id,
                                 const GameConfig& config) {
  image.validate();
  config.validate();
  return play(Game::insertion, insertion_start_image(image, config), image, map, scorer, class_id,
              config);
}

double auc(const ProbabilityCurve& curve) {
  curve.validate();
  // Trapezoid rule written relative to the first ordinate so a constant
  // curve integrates to its value without rounding.
  const auto& pts = curve.points;
  const double y0 = pts.front().probability;
  double area = y0 * (pts.back().fraction - pts.front().fraction);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double dx = pts[i].fraction - pts[i - 1].fraction;
    area += dx * ((pts[i - 1].probability - y0) + (pts[i].probability - y0)) / 2.0;
  }
  return std::clamp(area, 0.0, 1.0);
}

std::string curve_csv(const ProbabilityCurve& curve) {
  std::string out = "fraction,probability\n";
  char buf[64];
  for (const auto& p : curve.points) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g\n", p.fraction, p.probability);
    out += buf;
  }
  return out;
}

}  // namespace scb
