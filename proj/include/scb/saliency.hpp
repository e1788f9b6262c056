#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "scb/image.hpp"
#include "scb/mask.hpp"
#include "scb/scorer.hpp"

namespace scb {

enum class Method : std::uint8_t { shape = 0, rise = 1, external = 2, exact = 3 };

std::string to_string(Method m);
/// Accepts "shape", "rise", "external", "exact".
Method parse_method(const std::string& s);

struct SaliencyMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> scores;  // row-major
  std::size_t class_id = 0;
  Method method = Method::shape;
  std::string image_id;
  std::uint64_t config_digest = 0;
  /// Pixels whose conditioning weight summed to zero; scored 0.
  std::size_t degenerate_pixels = 0;

  double at(std::size_t y, std::size_t x) const { return scores[y * width + x]; }
};

/// Change in class probability caused by masking: p_orig − p_masked.
constexpr double prediction_shift(double p_orig, double p_masked) noexcept {
  return p_orig - p_masked;
}

enum class Normalization {
  empirical,  // Σ_i w_i·(1 − M_i(λ)) per pixel (or Σ_i w_i·M_i(λ) for RISE)
  analytic,   // (1 − p)·Σ_i w_i (or p·Σ_i w_i for RISE)
};

struct EstimatorOptions {
  int workers = 0;              // 0 = OpenMP default
  std::size_t batch_size = 16;  // masked images per scorer call
  Normalization normalization = Normalization::empirical;
  /// Per-mask weights; empty means every mask counts once.
  std::span<const double> mask_weights = {};
  /// Use the single-threaded kernels and sequential scorer calls.
  bool serial = false;
};

/// Full accumulator state of a SHAPE or RISE run.
struct EstimatorResult {
  SaliencyMap map;
  std::vector<double> numerators;
  std::vector<double> denominators;
};

/// Necessity map: Σ_i w_i·shift_i·(1 − M_i(λ)) / Σ_i w_i·(1 − M_i(λ)) with
/// shift_i = f_c(I) − f_c(I ⊙ M_i).
EstimatorResult shape_estimate(const ImageTensor& image, const MaskSet& masks, const Scorer& scorer,
                               std::size_t class_id, const EstimatorOptions& opts = {});
SaliencyMap shape_scores(const ImageTensor& image, const MaskSet& masks, const Scorer& scorer,
                         std::size_t class_id, const EstimatorOptions& opts = {});

/// Sufficiency map: Σ_i w_i·f_c(I ⊙ M_i)·M_i(λ) / Σ_i w_i·M_i(λ).
EstimatorResult rise_estimate(const ImageTensor& image, const MaskSet& masks, const Scorer& scorer,
                              std::size_t class_id, const EstimatorOptions& opts = {});
SaliencyMap rise_scores(const ImageTensor& image, const MaskSet& masks, const Scorer& scorer,
                        std::size_t class_id, const EstimatorOptions& opts = {});

inline constexpr std::size_t kMaxEnumerationCells = 20;

/// Exact conditional expectation by enumerating every binary grid:
///   Σ_m shift(m)·(1 − m(λ))·p^|m|(1−p)^(hw−|m|) / (1 − p).
/// Needs upsample = false and grid_h·grid_w ≤ 20.
SaliencyMap exact_necessity(const ImageTensor& image, const MaskConfig& config,
                            const Scorer& scorer, std::size_t class_id);

std::uint64_t config_digest(const MaskConfig& config, const std::string& scorer_identity);

// SMAP: "SMAP", u16 version = 1, u32 h, u32 w, u32 class_id, u8 method,
// u64 config digest, h·w f32 scores; all little-endian.
std::vector<std::uint8_t> encode_smap(const SaliencyMap& map);
SaliencyMap decode_smap(std::span<const std::uint8_t> bytes);
void save_map(const std::string& path, const SaliencyMap& map);
/// Reads an SMAP file as an externally produced map.
SaliencyMap load_external_map(const std::string& path);

}  // namespace scb
