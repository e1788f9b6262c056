#include "scb/kernels.hpp"

namespace scb::kernels::serial {

void render_masks(const MaskConfig& config, std::size_t first, std::size_t n,
                  std::span<float> out) {
  const std::size_t p = config.pixels();
  for (std::size_t b = 0; b < n; ++b) render_mask(config, first + b, out.subspan(b * p, p));
}

void apply_masks(const ImageTensor& image, std::span<const float> masks, std::size_t n,
                 std::span<float> out) {
  const std::size_t p = image.pixels();
  const std::size_t vol = image.data.size();
  for (std::size_t b = 0; b < n; ++b) {
    const float* m = masks.data() + b * p;
    float* dst = out.data() + b * vol;
    for (std::size_t c = 0; c < image.channels; ++c) {
      const float* src = image.data.data() + c * p;
      for (std::size_t i = 0; i < p; ++i) dst[c * p + i] = src[i] * m[i];
    }
  }
}

void accumulate(std::span<const float> masks, std::size_t n, std::size_t pixels,
                std::span<const double> values, std::span<const double> mask_weight,
                Weighting weighting, std::span<double> num, std::span<double> den) {
  const bool absent = weighting == Weighting::absent;
  for (std::size_t p = 0; p < pixels; ++p) {
    double nu = num[p];
    double de = den[p];
    for (std::size_t b = 0; b < n; ++b) {
      const double m = masks[b * pixels + p];
      const double f = absent ? 1.0 - m : m;
      const double w = mask_weight.empty() ? f : mask_weight[b] * f;
      nu += w * values[b];
      de += w;
    }
    num[p] = nu;
    den[p] = de;
  }
}

}  // namespace scb::kernels::serial
