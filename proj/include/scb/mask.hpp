#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace scb {

/// Parameters of a random mask set. Defaults are the 7×7 / p=0.1 / 6000 /
/// 224×224 setting used for full-size runs.
struct MaskConfig {
  std::size_t grid_h = 7;
  std::size_t grid_w = 7;
  double keep_prob = 0.1;  // P[cell = 1], i.e. pixel kept
  std::size_t count = 6000;
  std::size_t target_h = 224;
  std::size_t target_w = 224;
  std::uint64_t seed = 0;
  bool upsample = true;

  void validate() const;

  std::size_t pixels() const noexcept { return target_h * target_w; }
  std::size_t grid_cells() const noexcept { return grid_h * grid_w; }
  std::size_t cell_h() const noexcept { return (target_h + grid_h - 1) / grid_h; }
  std::size_t cell_w() const noexcept { return (target_w + grid_w - 1) / grid_w; }
  std::size_t upsampled_h() const noexcept { return (grid_h + 1) * cell_h(); }
  std::size_t upsampled_w() const noexcept { return (grid_w + 1) * cell_w(); }

  /// Bytes needed to hold every mask value as 32-bit floats.
  std::size_t materialized_bytes() const noexcept { return count * pixels() * sizeof(float); }

  bool operator==(const MaskConfig&) const = default;
};

using BinaryGrid = std::vector<std::uint8_t>;

struct MaskShift {
  std::size_t dy = 0;
  std::size_t dx = 0;
  bool operator==(const MaskShift&) const = default;
};

struct Mask {
  std::vector<float> values;  // target_h × target_w, row-major
  BinaryGrid source_grid;     // grid_h × grid_w
  MaskShift shift;
};

/// Grid `index` of the set; reproducible from (seed, index) alone.
BinaryGrid generate_grid(const MaskConfig& config, std::size_t index);

/// Crop offset drawn for mask `index` (zero when upsample is off).
MaskShift generate_shift(const MaskConfig& config, std::size_t index);

/// Bilinear upsampling to (grid+1)·cell followed by a crop at `shift`.
Mask upsample_mask(const BinaryGrid& grid, const MaskConfig& config, MaskShift shift);

/// Writes mask `index` into `out` (length target_h·target_w) without
/// touching any other mask.
void render_mask(const MaskConfig& config, std::size_t index, std::span<float> out);

enum class MaskStorage {
  materialized,  // hold every mask; ResourceError above the budget
  on_demand,     // regenerate from (seed, index) on each access
  automatic,     // materialize when within budget, otherwise on demand
};

inline constexpr std::size_t kDefaultMaskBudgetBytes = std::size_t{512} << 20;

class MaskSet {
 public:
  /// Empty set.
  MaskSet() { config_.count = 0; }

  const MaskConfig& config() const noexcept { return config_; }
  std::size_t size() const noexcept { return config_.count; }
  std::size_t pixels() const noexcept { return config_.pixels(); }
  bool materialized() const noexcept { return !values_.empty(); }
  /// False for sets imported from a file, which carry values only.
  bool has_source_grids() const noexcept { return !grids_.empty() || !materialized(); }

  /// Copies mask `index` into `out`, regenerating it if the set is on-demand.
  void fill(std::size_t index, std::span<float> out) const;
  /// Contiguous view of masks [first, first+n); only for materialized sets.
  std::span<const float> block(std::size_t first, std::size_t n) const;

  Mask mask(std::size_t index) const;

  /// Takes ownership of explicit mask values (count × pixels).
  static MaskSet from_values(const MaskConfig& config, std::vector<float> values);

  friend MaskSet generate_mask_set(const MaskConfig&, MaskStorage, std::size_t, int);
  friend MaskSet enumerate_binary_masks(std::size_t, std::size_t, double);

 private:
  MaskConfig config_{};
  std::vector<float> values_;
  std::vector<std::uint8_t> grids_;
  std::vector<MaskShift> shifts_;
};

/// Builds the set for `config`. Identical values for every storage mode and
/// worker count.
MaskSet generate_mask_set(const MaskConfig& config,
                          MaskStorage storage = MaskStorage::automatic,
                          std::size_t budget_bytes = kDefaultMaskBudgetBytes, int workers = 0);

/// All 2^(h·w) binary masks at grid resolution, mask i having cell j set iff
/// bit j of i is set. `keep_prob` is recorded in the config only.
MaskSet enumerate_binary_masks(std::size_t grid_h, std::size_t grid_w, double keep_prob);

/// P[M = m] = p^|m| (1-p)^(hw-|m|) for every mask of a binary set.
std::vector<double> binary_mask_probabilities(const MaskSet& set, double keep_prob);

/// (1/N) Σ_i (1 − M_i(y, x)).
double empirical_zero_rate(const MaskSet& set, std::size_t y, std::size_t x);

}  // namespace scb
