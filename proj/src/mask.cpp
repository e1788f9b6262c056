#include "scb/mask.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "scb/errors.hpp"
#include "scb/image.hpp"
#include "scb/kernels.hpp"
#include "scb/rng.hpp"

namespace scb {

void MaskConfig::validate() const {
  if (grid_h == 0 || grid_w == 0) throw ValidationError("mask grid dimensions must be positive");
  if (target_h == 0 || target_w == 0) throw ValidationError("mask target dimensions must be positive");
  if (count == 0) throw ValidationError("mask count must be positive");
  if (!(keep_prob > 0.0 && keep_prob < 1.0)) {
    throw ValidationError("keep probability must lie in (0,1), got " + std::to_string(keep_prob));
  }
  if (!upsample && (grid_h != target_h || grid_w != target_w)) {
    throw ValidationError("without upsampling the grid must equal the target resolution");
  }
  if (upsample && (grid_h > target_h || grid_w > target_w)) {
    throw ValidationError("mask grid is finer than the target resolution");
  }
}

namespace {

// Draw layout of stream (seed, index): grid cells in row-major order, then dy, dx.
void draw_grid(const MaskConfig& config, CounterStream& stream, std::span<std::uint8_t> out) {
  for (auto& cell : out) cell = stream.uniform() < config.keep_prob ? 1 : 0;
}

void check_index(const MaskConfig& config, std::size_t index) {
  if (index >= config.count) {
    throw RangeError("mask index " + std::to_string(index) + " out of range [0, " +
                     std::to_string(config.count) + ")");
  }
}

}  // namespace

BinaryGrid generate_grid(const MaskConfig& config, std::size_t index) {
  check_index(config, index);
  BinaryGrid grid(config.grid_cells());
  CounterStream stream(config.seed, index);
  draw_grid(config, stream, grid);
  return grid;
}

MaskShift generate_shift(const MaskConfig& config, std::size_t index) {
  check_index(config, index);
  if (!config.upsample) return {};
  CounterStream stream(config.seed, index);
  for (std::size_t i = 0; i < config.grid_cells(); ++i) stream.next();
  MaskShift s;
  s.dy = static_cast<std::size_t>(stream.below(config.cell_h()));
  s.dx = static_cast<std::size_t>(stream.below(config.cell_w()));
  return s;
}

namespace {

void upsample_into(const BinaryGrid& grid, const MaskConfig& config, MaskShift shift,
                   std::span<float> out) {
  if (!config.upsample) {
    std::transform(grid.begin(), grid.end(), out.begin(),
                   [](std::uint8_t v) { return static_cast<float>(v); });
    return;
  }
  const std::size_t uh = config.upsampled_h();
  const std::size_t uw = config.upsampled_w();
  std::vector<float> src(grid.begin(), grid.end());
  std::vector<float> big(uh * uw);
  bilinear_resize(src, config.grid_h, config.grid_w, big, uh, uw);
  for (std::size_t y = 0; y < config.target_h; ++y) {
    const float* row = big.data() + (y + shift.dy) * uw + shift.dx;
    std::copy(row, row + config.target_w, out.begin() + static_cast<std::ptrdiff_t>(y * config.target_w));
  }
}

}  // namespace

Mask upsample_mask(const BinaryGrid& grid, const MaskConfig& config, MaskShift shift) {
  if (grid.size() != config.grid_cells()) throw ValidationError("grid size does not match config");
  if (config.upsample && (shift.dy >= config.cell_h() || shift.dx >= config.cell_w())) {
    throw RangeError("mask shift (" + std::to_string(shift.dy) + ", " + std::to_string(shift.dx) +
                     ") outside [0, " + std::to_string(config.cell_h()) + ") x [0, " +
                     std::to_string(config.cell_w()) + ")");
  }
  if (!config.upsample && (shift.dy != 0 || shift.dx != 0)) {
    throw RangeError("mask shift must be zero without upsampling");
  }
  Mask m;
  m.values.resize(config.pixels());
  m.source_grid = grid;
  m.shift = shift;
  upsample_into(grid, config, shift, m.values);
  return m;
}

void render_mask(const MaskConfig& config, std::size_t index, std::span<float> out) {
  check_index(config, index);
  CounterStream stream(config.seed, index);
  BinaryGrid grid(config.grid_cells());
  draw_grid(config, stream, grid);
  MaskShift shift;
  if (config.upsample) {
    shift.dy = static_cast<std::size_t>(stream.below(config.cell_h()));
    shift.dx = static_cast<std::size_t>(stream.below(config.cell_w()));
  }
  upsample_into(grid, config, shift, out);
}

void MaskSet::fill(std::size_t index, std::span<float> out) const {
  if (index >= size()) throw RangeError("mask index " + std::to_string(index) + " out of range");
  if (materialized()) {
    auto src = block(index, 1);
    std::copy(src.begin(), src.end(), out.begin());
  } else {
    render_mask(config_, index, out);
  }
}

std::span<const float> MaskSet::block(std::size_t first, std::size_t n) const {
  if (!materialized()) throw ValidationError("mask set is not materialized");
  if (first + n > size()) throw RangeError("mask block out of range");
  return {values_.data() + first * pixels(), n * pixels()};
}

Mask MaskSet::mask(std::size_t index) const {
  Mask m;
  m.values.resize(pixels());
  fill(index, m.values);
  if (!grids_.empty()) {
    const std::size_t g = config_.grid_cells();
    m.source_grid.assign(grids_.begin() + static_cast<std::ptrdiff_t>(index * g),
                         grids_.begin() + static_cast<std::ptrdiff_t>((index + 1) * g));
    m.shift = shifts_[index];
  } else if (!materialized()) {
    m.source_grid = generate_grid(config_, index);
    m.shift = generate_shift(config_, index);
  }
  return m;
}

MaskSet MaskSet::from_values(const MaskConfig& config, std::vector<float> values) {
  if (config.count == 0) throw ValidationError("mask count must be positive");
  if (values.size() != config.count * config.pixels()) {
    throw ValidationError("mask value buffer does not match count x target size");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0f && values[i] <= 1.0f)) {
      throw ValidationError("mask value out of [0,1] at flat index " + std::to_string(i));
    }
  }
  MaskSet s;
  s.config_ = config;
  s.values_ = std::move(values);
  return s;
}

MaskSet generate_mask_set(const MaskConfig& config, MaskStorage storage, std::size_t budget_bytes,
                          int workers) {
  config.validate();
  MaskSet s;
  s.config_ = config;
  const std::size_t need = config.materialized_bytes();
  const bool fits = need <= budget_bytes;
  if (storage == MaskStorage::materialized && !fits) {
    throw ResourceError("mask set needs " + std::to_string(need) + " bytes, budget is " +
                            std::to_string(budget_bytes),
                        need);
  }
  if (storage == MaskStorage::on_demand || (storage == MaskStorage::automatic && !fits)) {
    return s;
  }
  s.values_.resize(config.count * config.pixels());
  kernels::render_masks(config, 0, config.count, s.values_, workers);
  const std::size_t g = config.grid_cells();
  s.grids_.resize(config.count * g);
  s.shifts_.resize(config.count);
  for (std::size_t i = 0; i < config.count; ++i) {
    CounterStream stream(config.seed, i);
    draw_grid(config, stream, std::span(s.grids_).subspan(i * g, g));
    if (config.upsample) {
      s.shifts_[i].dy = static_cast<std::size_t>(stream.below(config.cell_h()));
      s.shifts_[i].dx = static_cast<std::size_t>(stream.below(config.cell_w()));
    }
  }
  return s;
}

MaskSet enumerate_binary_masks(std::size_t grid_h, std::size_t grid_w, double keep_prob) {
  const std::size_t cells = grid_h * grid_w;
  if (cells == 0 || cells > 20) {
    throw EnumerationBoundError("binary mask enumeration limited to 20 cells (2^20 masks), got " +
                                std::to_string(cells));
  }
  MaskConfig c;
  c.grid_h = c.target_h = grid_h;
  c.grid_w = c.target_w = grid_w;
  c.keep_prob = keep_prob;
  c.count = std::size_t{1} << cells;
  c.upsample = false;
  c.validate();
  MaskSet s;
  s.config_ = c;
  s.values_.resize(c.count * cells);
  s.grids_.resize(c.count * cells);
  s.shifts_.resize(c.count);
  for (std::size_t i = 0; i < c.count; ++i) {
    for (std::size_t j = 0; j < cells; ++j) {
      const auto bit = static_cast<std::uint8_t>((i >> j) & 1U);
      s.grids_[i * cells + j] = bit;
      s.values_[i * cells + j] = bit;
    }
  }
  return s;
}

std::vector<double> binary_mask_probabilities(const MaskSet& set, double keep_prob) {
  const std::size_t cells = set.pixels();
  std::vector<double> probs(set.size());
  std::vector<float> m(cells);
  for (std::size_t i = 0; i < set.size(); ++i) {
    set.fill(i, m);
    std::size_t ones = 0;
    for (float v : m) {
      if (v != 0.0f && v != 1.0f) throw ValidationError("mask set is not binary");
      ones += v == 1.0f;
    }
    probs[i] = std::pow(keep_prob, static_cast<double>(ones)) *
               std::pow(1.0 - keep_prob, static_cast<double>(cells - ones));
  }
  return probs;
}

double empirical_zero_rate(const MaskSet& set, std::size_t y, std::size_t x) {
  if (set.size() == 0) throw ValidationError("empty mask set");
  const MaskConfig& c = set.config();
  if (y >= c.target_h || x >= c.target_w) throw RangeError("pixel outside mask dimensions");
  const std::size_t p = y * c.target_w + x;
  double acc = 0.0;
  if (set.materialized()) {
    auto all = set.block(0, set.size());
    for (std::size_t i = 0; i < set.size(); ++i) acc += 1.0 - all[i * set.pixels() + p];
  } else {
    std::vector<float> m(set.pixels());
    for (std::size_t i = 0; i < set.size(); ++i) {
      set.fill(i, m);
      acc += 1.0 - m[p];
    }
  }
  return acc / static_cast<double>(set.size());
}

}  // namespace scb
