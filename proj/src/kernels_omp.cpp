#include <omp.h>

#include <cstddef>

#include "scb/kernels.hpp"

namespace scb {

int resolve_workers(int workers) noexcept {
  return workers > 0 ? workers : omp_get_max_threads();
}

}  // namespace scb

namespace scb::kernels {

void render_masks(const MaskConfig& config, std::size_t first, std::size_t n,
                  std::span<float> out, int workers) {
  const std::size_t p = config.pixels();
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) num_threads(resolve_workers(workers))
  for (std::ptrdiff_t b = 0; b < count; ++b) {
    const auto ub = static_cast<std::size_t>(b);
    render_mask(config, first + ub, out.subspan(ub * p, p));
  }
}

void apply_masks(const ImageTensor& image, std::span<const float> masks, std::size_t n,
                 std::span<float> out, int workers) {
  const std::size_t p = image.pixels();
  const std::size_t vol = image.data.size();
  const std::size_t channels = image.channels;
  const float* src = image.data.data();
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) num_threads(resolve_workers(workers))
  for (std::ptrdiff_t b = 0; b < count; ++b) {
    const auto ub = static_cast<std::size_t>(b);
    const float* m = masks.data() + ub * p;
    float* dst = out.data() + ub * vol;
    for (std::size_t c = 0; c < channels; ++c) {
      for (std::size_t i = 0; i < p; ++i) dst[c * p + i] = src[c * p + i] * m[i];
    }
  }
}

void accumulate(std::span<const float> masks, std::size_t n, std::size_t pixels,
                std::span<const double> values, std::span<const double> mask_weight,
                Weighting weighting, std::span<double> num, std::span<double> den,
                int workers) {
  const bool absent = weighting == Weighting::absent;
  const bool weighted = !mask_weight.empty();
  constexpr std::size_t kTile = 512;
  const auto tiles = static_cast<std::ptrdiff_t>((pixels + kTile - 1) / kTile);
  // Parallel over pixel tiles only; within a tile the mask loop is outermost
  // and sequential, so each accumulator sees the serial addition order.
#pragma omp parallel for schedule(static) num_threads(resolve_workers(workers))
  for (std::ptrdiff_t t = 0; t < tiles; ++t) {
    const std::size_t lo = static_cast<std::size_t>(t) * kTile;
    const std::size_t hi = lo + kTile < pixels ? lo + kTile : pixels;
    for (std::size_t b = 0; b < n; ++b) {
      const float* m = masks.data() + b * pixels;
      const double v = values[b];
      const double mw = weighted ? mask_weight[b] : 1.0;
      for (std::size_t p = lo; p < hi; ++p) {
        const double mv = m[p];
        const double f = absent ? 1.0 - mv : mv;
        const double w = weighted ? mw * f : f;
        num[p] += w * v;
        den[p] += w;
      }
    }
  }
}

}  // namespace scb::kernels
