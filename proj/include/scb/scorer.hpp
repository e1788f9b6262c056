#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "scb/image.hpp"

namespace scb {

/// (C, H, W). A zero channel count means the scorer accepts 1 or 3 channels.
struct ImageShape {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  bool operator==(const ImageShape&) const = default;
};

/// Non-owning view of `count` equally shaped images stored back to back.
struct ImageBatch {
  ImageShape shape;
  std::size_t count = 0;
  std::span<const float> data;

  std::size_t volume() const noexcept { return shape.channels * shape.height * shape.width; }
  std::span<const float> image(std::size_t i) const { return data.subspan(i * volume(), volume()); }

  static ImageBatch of(const ImageTensor& img) {
    return {{img.channels, img.height, img.width}, 1, img.data};
  }
};

using ScoreRows = std::vector<std::vector<double>>;

/// Black-box model: batch of images in [0,1] → one score row per image.
/// Implementations are immutable after construction and safe to call from
/// several threads at once.
class Scorer {
 public:
  virtual ~Scorer() = default;

  virtual std::size_t n_classes() const = 0;
  virtual ImageShape input_shape() const = 0;
  virtual ScoreRows score(const ImageBatch& batch) const = 0;
  /// Stable textual identity; feeds the config digest of produced maps.
  virtual std::string identity() const = 0;
  /// False for logit probes whose rows are not probability vectors.
  virtual bool outputs_probabilities() const { return true; }

  std::vector<double> score_one(const ImageTensor& image) const;
  /// Throws ValidationError if `image` does not fit input_shape().
  void check_input(const ImageShape& shape) const;
};

using ScorerPtr = std::shared_ptr<const Scorer>;

/// Throws ContractViolation naming the first row that is not a probability
/// vector of length n_classes (entries ≥ 0, sum 1 ± tol).
void validate_probability_rows(const ScoreRows& rows, std::size_t n_classes, double tol = 1e-5);

std::size_t argmax(std::span<const double> row);

struct Rect {
  std::size_t y0 = 0, x0 = 0, y1 = 0, x1 = 0;  // half-open [y0,y1) × [x0,x1)
  std::size_t area() const noexcept { return y1 > y0 && x1 > x0 ? (y1 - y0) * (x1 - x0) : 0; }
  bool contains(std::size_t y, std::size_t x) const noexcept {
    return y >= y0 && y < y1 && x >= x0 && x < x1;
  }
  bool operator==(const Rect&) const = default;
};

enum class SyntheticKind { linear_softmax, region_mean };

enum class Link {
  softmax,   // probabilities = softmax(logits)
  identity,  // raw logits; closed-form probe only
};

struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::linear_softmax;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t n_classes = 0;
  /// linear_softmax: n_classes × H × W, applied to the channel-mean intensity.
  std::vector<double> weights;
  Link link = Link::softmax;
  /// region_mean: one rectangle per class.
  std::vector<Rect> regions;
};

/// z_c = Σ_λ w_{c,λ} I(λ); rows are softmax(z) (or z for the identity link).
ScorerPtr linear_softmax_scorer(const SyntheticSpec& spec);

/// s_c = mean intensity inside region_c; rows are s / Σ s, uniform if Σ s = 0.
ScorerPtr region_mean_scorer(const SyntheticSpec& spec);

/// Returns the same class distribution for every input.
ScorerPtr constant_scorer(std::vector<double> probs, ImageShape shape);

/// Random weights in [-scale, scale] from `seed`.
SyntheticSpec random_linear_spec(std::size_t n_classes, std::size_t h, std::size_t w,
                                 std::uint64_t seed, double scale = 1.0, Link link = Link::softmax);

}  // namespace scb
