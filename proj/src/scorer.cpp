#include "scb/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "scb/digest.hpp"
#include "scb/errors.hpp"
#include "scb/rng.hpp"

namespace scb {

std::vector<double> Scorer::score_one(const ImageTensor& image) const {
  auto rows = score(ImageBatch::of(image));
  return std::move(rows.at(0));
}

void Scorer::check_input(const ImageShape& shape) const {
  const ImageShape want = input_shape();
  const bool channels_ok = want.channels == 0 ? (shape.channels == 1 || shape.channels == 3)
                                              : shape.channels == want.channels;
  if (!channels_ok || shape.height != want.height || shape.width != want.width) {
    std::ostringstream os;
    os << "image shape (" << shape.channels << ", " << shape.height << ", " << shape.width
       << ") does not match scorer input (" << want.channels << ", " << want.height << ", "
       << want.width << ")";
    throw ValidationError(os.str());
  }
}

void validate_probability_rows(const ScoreRows& rows, std::size_t n_classes, double tol) {
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != n_classes) {
      throw ContractViolation("probability row " + std::to_string(r) + " has " +
                                  std::to_string(row.size()) + " entries, expected " +
                                  std::to_string(n_classes),
                              r);
    }
    double sum = 0.0;
    for (double v : row) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw ContractViolation("probability row " + std::to_string(r) +
                                    " has a negative or non-finite entry",
                                r);
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol) {
      throw ContractViolation("probability row " + std::to_string(r) + " sums to " +
                                  std::to_string(sum),
                              r);
    }
  }
}

std::size_t argmax(std::span<const double> row) {
  return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

namespace {

void check_batch(const Scorer& s, const ImageBatch& batch) {
  s.check_input(batch.shape);
  if (batch.data.size() < batch.count * batch.volume()) {
    throw ValidationError("image batch buffer is shorter than count x volume");
  }
}

/// Channel-mean intensity of pixel p of one image in a batch.
double pixel_intensity(std::span<const float> img, std::size_t channels, std::size_t pixels,
                       std::size_t p) {
  if (channels == 1) return img[p];
  double s = 0.0;
  for (std::size_t c = 0; c < channels; ++c) s += img[c * pixels + p];
  return s / static_cast<double>(channels);
}

class LinearScorer final : public Scorer {
 public:
  explicit LinearScorer(SyntheticSpec spec) : spec_(std::move(spec)) {
    std::string raw(reinterpret_cast<const char*>(spec_.weights.data()),
                    spec_.weights.size() * sizeof(double));
    identity_ = std::string("linear:") + (spec_.link == Link::softmax ? "softmax" : "identity") +
                ":" + std::to_string(spec_.n_classes) + ":" + std::to_string(spec_.height) + "x" +
                std::to_string(spec_.width) + ":" + sha256_hex(raw).substr(0, 16);
  }

  std::size_t n_classes() const override { return spec_.n_classes; }
  ImageShape input_shape() const override { return {0, spec_.height, spec_.width}; }
  std::string identity() const override { return identity_; }
  bool outputs_probabilities() const override { return spec_.link == Link::softmax; }

  ScoreRows score(const ImageBatch& batch) const override {
    check_batch(*this, batch);
    const std::size_t pixels = spec_.height * spec_.width;
    ScoreRows rows(batch.count, std::vector<double>(spec_.n_classes));
    std::vector<double> intensity(pixels);
    for (std::size_t i = 0; i < batch.count; ++i) {
      auto img = batch.image(i);
      for (std::size_t p = 0; p < pixels; ++p) {
        intensity[p] = pixel_intensity(img, batch.shape.channels, pixels, p);
      }
      auto& z = rows[i];
      for (std::size_t c = 0; c < spec_.n_classes; ++c) {
        const double* w = spec_.weights.data() + c * pixels;
        double acc = 0.0;
        for (std::size_t p = 0; p < pixels; ++p) acc += w[p] * intensity[p];
        z[c] = acc;
      }
      if (spec_.link == Link::softmax) {
        const double zmax = *std::max_element(z.begin(), z.end());
        double total = 0.0;
        for (double& v : z) {
          v = std::exp(v - zmax);
          total += v;
        }
        for (double& v : z) v /= total;
      }
    }
    return rows;
  }

 private:
  SyntheticSpec spec_;
  std::string identity_;
};

class RegionScorer final : public Scorer {
 public:
  explicit RegionScorer(SyntheticSpec spec) : spec_(std::move(spec)) {
    std::ostringstream os;
    os << "region:" << spec_.height << "x" << spec_.width;
    for (const Rect& r : spec_.regions) os << ":" << r.y0 << "," << r.x0 << "," << r.y1 << "," << r.x1;
    identity_ = os.str();
  }

  std::size_t n_classes() const override { return spec_.regions.size(); }
  ImageShape input_shape() const override { return {0, spec_.height, spec_.width}; }
  std::string identity() const override { return identity_; }

  ScoreRows score(const ImageBatch& batch) const override {
    check_batch(*this, batch);
    const std::size_t pixels = spec_.height * spec_.width;
    const std::size_t channels = batch.shape.channels;
    ScoreRows rows(batch.count, std::vector<double>(n_classes()));
    for (std::size_t i = 0; i < batch.count; ++i) {
      auto img = batch.image(i);
      auto& s = rows[i];
      double total = 0.0;
      for (std::size_t c = 0; c < n_classes(); ++c) {
        const Rect& r = spec_.regions[c];
        double acc = 0.0;
        for (std::size_t ch = 0; ch < channels; ++ch) {
          for (std::size_t y = r.y0; y < r.y1; ++y) {
            for (std::size_t x = r.x0; x < r.x1; ++x) acc += img[ch * pixels + y * spec_.width + x];
          }
        }
        s[c] = acc / static_cast<double>(r.area() * channels);
        total += s[c];
      }
      for (double& v : s) v = total > 0.0 ? v / total : 1.0 / static_cast<double>(s.size());
    }
    return rows;
  }

 private:
  SyntheticSpec spec_;
  std::string identity_;
};

class ConstantScorer final : public Scorer {
 public:
  ConstantScorer(std::vector<double> probs, ImageShape shape)
      : probs_(std::move(probs)), shape_(shape) {
    std::ostringstream os;
    os.precision(17);
    os << "constant";
    for (double p : probs_) os << ":" << p;
    identity_ = os.str();
  }
  std::size_t n_classes() const override { return probs_.size(); }
  ImageShape input_shape() const override { return shape_; }
  std::string identity() const override { return identity_; }
  ScoreRows score(const ImageBatch& batch) const override {
    check_batch(*this, batch);
    return ScoreRows(batch.count, probs_);
  }

 private:
  std::vector<double> probs_;
  ImageShape shape_;
  std::string identity_;
};

}  // namespace

ScorerPtr linear_softmax_scorer(const SyntheticSpec& spec) {
  if (spec.kind != SyntheticKind::linear_softmax) throw ValidationError("spec is not linear_softmax");
  if (spec.n_classes == 0 || spec.height == 0 || spec.width == 0) {
    throw ValidationError("linear scorer needs positive class count and input size");
  }
  if (spec.weights.size() != spec.n_classes * spec.height * spec.width) {
    throw ValidationError("linear weights have " + std::to_string(spec.weights.size()) +
                          " entries, expected n_classes*H*W = " +
                          std::to_string(spec.n_classes * spec.height * spec.width));
  }
  for (double w : spec.weights) {
    if (!std::isfinite(w)) throw ValidationError("linear weights must be finite");
  }
  return std::make_shared<LinearScorer>(spec);
}

ScorerPtr region_mean_scorer(const SyntheticSpec& spec) {
  if (spec.kind != SyntheticKind::region_mean) throw ValidationError("spec is not region_mean");
  if (spec.regions.empty()) throw ValidationError("region scorer needs at least one region");
  for (std::size_t c = 0; c < spec.regions.size(); ++c) {
    const Rect& r = spec.regions[c];
    if (r.area() == 0) throw ValidationError("region " + std::to_string(c) + " has zero area");
    if (r.y1 > spec.height || r.x1 > spec.width) {
      throw ValidationError("region " + std::to_string(c) + " exceeds the input bounds");
    }
  }
  return std::make_shared<RegionScorer>(spec);
}

ScorerPtr constant_scorer(std::vector<double> probs, ImageShape shape) {
  if (probs.empty()) throw ValidationError("constant scorer needs at least one class");
  return std::make_shared<ConstantScorer>(std::move(probs), shape);
}

SyntheticSpec random_linear_spec(std::size_t n_classes, std::size_t h, std::size_t w,
                                 std::uint64_t seed, double scale, Link link) {
  SyntheticSpec spec;
  spec.kind = SyntheticKind::linear_softmax;
  spec.n_classes = n_classes;
  spec.height = h;
  spec.width = w;
  spec.link = link;
  spec.weights.resize(n_classes * h * w);
  CounterStream stream(derive_seed(seed, "linear-weights"), 0);
  for (double& v : spec.weights) v = scale * (2.0 * stream.uniform() - 1.0);
  return spec;
}

}  // namespace scb
