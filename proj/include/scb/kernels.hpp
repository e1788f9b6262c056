#pragma once

// Data-parallel inner loops. The OpenMP versions in scb::kernels and the
// plain loops in scb::kernels::serial produce bit-identical output: every
// reduction runs in mask-index order per pixel, whatever the thread count.

#include <cstddef>
#include <span>

#include "scb/image.hpp"
#include "scb/mask.hpp"

namespace scb::kernels {

/// Which factor of a mask weights a contribution at pixel λ.
enum class Weighting {
  absent,   // 1 − M(λ): necessity
  present,  // M(λ): sufficiency
};

/// Fills `out` (n × pixels) with masks [first, first+n) of `config`.
void render_masks(const MaskConfig& config, std::size_t first, std::size_t n,
                  std::span<float> out, int workers);

/// out[b] = image ⊙ masks[b] on every channel; `out` holds n images of the
/// image's shape, back to back.
void apply_masks(const ImageTensor& image, std::span<const float> masks, std::size_t n,
                 std::span<float> out, int workers);

/// For every pixel p and mask b in order:
///   f = (weighting == absent) ? 1 − masks[b][p] : masks[b][p]
///   num[p] += mask_weight[b] · value[b] · f
///   den[p] += mask_weight[b] · f
/// An empty `mask_weight` means weight 1 for every mask.
void accumulate(std::span<const float> masks, std::size_t n, std::size_t pixels,
                std::span<const double> values, std::span<const double> mask_weight,
                Weighting weighting, std::span<double> num, std::span<double> den,
                int workers);

}  // namespace scb::kernels

namespace scb::kernels::serial {

void render_masks(const MaskConfig& config, std::size_t first, std::size_t n,
                  std::span<float> out);
void apply_masks(const ImageTensor& image, std::span<const float> masks, std::size_t n,
                 std::span<float> out);
void accumulate(std::span<const float> masks, std::size_t n, std::size_t pixels,
                std::span<const double> values, std::span<const double> mask_weight,
                Weighting weighting, std::span<double> num, std::span<double> den);

}  // namespace scb::kernels::serial

namespace scb {

/// Resolves a worker count: 0 means the OpenMP default.
int resolve_workers(int workers) noexcept;

}  // namespace scb
