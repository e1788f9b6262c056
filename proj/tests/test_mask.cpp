#include <doctest.h>

#include <cmath>

#include "scb/errors.hpp"
#include "scb/mask.hpp"
#include "scb/mask_file.hpp"

using namespace scb;

namespace {

MaskConfig small_config() {
  MaskConfig c;
  c.grid_h = c.grid_w = 3;
  c.target_h = c.target_w = 10;
  c.count = 40;
  c.seed = 1234;
  return c;
}

}  // namespace

TEST_CASE("generate_grid is reproducible per (seed, index)") {
  const MaskConfig c = small_config();
  CHECK(generate_grid(c, 17) == generate_grid(c, 17));
  CHECK(generate_grid(c, 17) != generate_grid(c, 18));
  MaskConfig other = c;
  other.seed = 99;
  CHECK(generate_grid(c, 5) != generate_grid(other, 5));
  CHECK_THROWS_AS(generate_grid(c, c.count), RangeError);
}

TEST_CASE("keep probability near zero yields empty grids") {
  MaskConfig c = small_config();
  c.keep_prob = 1e-300;
  for (std::size_t i = 0; i < c.count; ++i) {
    for (auto v : generate_grid(c, i)) CHECK(v == 0);
  }
}

TEST_CASE("7x7 grids at p=0.1 keep about 10% of cells") {
  MaskConfig c;
  c.count = 6000;
  std::size_t ones = 0;
  for (std::size_t i = 0; i < c.count; ++i) {
    for (auto v : generate_grid(c, i)) ones += v;
  }
  const double rate = static_cast<double>(ones) / (6000.0 * 49.0);
  CHECK(std::abs(rate - 0.1) <= 0.01);
}

TEST_CASE("per-cell keep rate stays within 3 sigma for at least 99% of cells") {
  MaskConfig c;
  c.grid_h = c.grid_w = c.target_h = c.target_w = 32;
  c.upsample = false;
  c.count = 5000;
  c.keep_prob = 0.1;
  std::vector<double> mean(c.grid_cells(), 0.0);
  for (std::size_t i = 0; i < c.count; ++i) {
    const auto g = generate_grid(c, i);
    for (std::size_t j = 0; j < g.size(); ++j) mean[j] += g[j];
  }
  const double sigma = std::sqrt(c.keep_prob * (1 - c.keep_prob) / c.count);
  std::size_t within = 0;
  for (double m : mean) within += std::abs(m / c.count - c.keep_prob) <= 3 * sigma;
  CHECK(static_cast<double>(within) >= 0.99 * static_cast<double>(mean.size()));
}

TEST_CASE("upsample_mask of constant grids is constant") {
  MaskConfig c = small_config();
  for (std::uint8_t fill : {std::uint8_t{0}, std::uint8_t{1}}) {
    const BinaryGrid g(c.grid_cells(), fill);
    for (std::size_t dy = 0; dy < c.cell_h(); ++dy) {
      const Mask m = upsample_mask(g, c, {dy, c.cell_w() - 1});
      for (float v : m.values) CHECK(v == static_cast<float>(fill));
    }
  }
}

TEST_CASE("upsample_mask matches the hand-computed bilinear surface") {
  // Grid [[1,0],[0,0]] to 4x4: cell 2, upsampled 6x6. Output row o samples
  // source row (o+0.5)/3-0.5 clamped to [0,1], i.e. 0, 0, 1/3, 2/3, 1, 1,
  // and the surface is (1-sy)(1-sx).
  MaskConfig c;
  c.grid_h = c.grid_w = 2;
  c.target_h = c.target_w = 4;
  c.count = 1;
  const BinaryGrid g = {1, 0, 0, 0};
  const Mask m = upsample_mask(g, c, {0, 0});
  auto at = [&](std::size_t y, std::size_t x) { return static_cast<double>(m.values[y * 4 + x]); };
  CHECK(at(0, 0) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(at(1, 1) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(at(0, 2) == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
  CHECK(at(0, 3) == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
  CHECK(at(2, 2) == doctest::Approx(4.0 / 9.0).epsilon(1e-6));
  CHECK(at(2, 3) == doctest::Approx(2.0 / 9.0).epsilon(1e-6));
  CHECK(at(3, 3) == doctest::Approx(1.0 / 9.0).epsilon(1e-6));

  // Shift (1,1) reads the 6x6 surface one row and column further in.
  const Mask s = upsample_mask(g, c, {1, 1});
  CHECK(s.values[0] == doctest::Approx(1.0));
  CHECK(s.values[1 * 4 + 1] == doctest::Approx(4.0 / 9.0).epsilon(1e-6));
  CHECK(s.values[2 * 4 + 2] == doctest::Approx(1.0 / 9.0).epsilon(1e-6));
  CHECK(s.values[3 * 4 + 3] == doctest::Approx(0.0));

  CHECK_THROWS_AS(upsample_mask(g, c, {2, 0}), RangeError);
  CHECK_THROWS_AS(upsample_mask(g, c, {0, 2}), RangeError);
}

TEST_CASE("upsampled masks stay in [0,1]") {
  MaskConfig c = small_config();
  c.count = 200;
  c.keep_prob = 0.5;
  const MaskSet s = generate_mask_set(c);
  for (float v : s.block(0, s.size())) {
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
  }
}

TEST_CASE("generate_mask_set validation and storage modes") {
  MaskConfig c = small_config();
  c.count = 0;
  CHECK_THROWS_AS(generate_mask_set(c), ValidationError);
  c = small_config();
  c.keep_prob = 1.0;
  CHECK_THROWS_AS(generate_mask_set(c), ValidationError);
  c = small_config();
  c.upsample = false;
  CHECK_THROWS_AS(generate_mask_set(c), ValidationError);

  c = small_config();
  try {
    generate_mask_set(c, MaskStorage::materialized, 100);
    FAIL("expected a resource error");
  } catch (const ResourceError& e) {
    CHECK(e.required_bytes() == c.count * 100 * sizeof(float));
  }
  CHECK_FALSE(generate_mask_set(c, MaskStorage::automatic, 100).materialized());
  CHECK(generate_mask_set(c, MaskStorage::automatic).materialized());
}

TEST_CASE("materialized, on-demand and multi-worker sets are bit-identical") {
  const MaskConfig c = small_config();
  const MaskSet a = generate_mask_set(c, MaskStorage::materialized, kDefaultMaskBudgetBytes, 1);
  const MaskSet b = generate_mask_set(c, MaskStorage::materialized, kDefaultMaskBudgetBytes, 4);
  const MaskSet lazy = generate_mask_set(c, MaskStorage::on_demand);
  CHECK(encode_msk1(a) == encode_msk1(b));
  CHECK(encode_msk1(a) == encode_msk1(lazy));
  // Each stored grid is the stand-alone grid for its index, in any order.
  for (std::size_t i = c.count; i-- > 0;) {
    CHECK(a.mask(i).source_grid == generate_grid(c, i));
    CHECK(lazy.mask(i).source_grid == generate_grid(c, i));
    CHECK(a.mask(i).shift == generate_shift(c, i));
  }
}

TEST_CASE("pass-through masks are binary copies of their grids") {
  MaskConfig c;
  c.grid_h = c.grid_w = c.target_h = c.target_w = 3;
  c.upsample = false;
  c.count = 50;
  const MaskSet s = generate_mask_set(c);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Mask m = s.mask(i);
    for (std::size_t j = 0; j < 9; ++j) CHECK(m.values[j] == static_cast<float>(m.source_grid[j]));
  }
}

TEST_CASE("paper-scale default config: 6000 masks within [0,1]") {
  MaskConfig c;  // 7x7, p=0.1, 6000, 224x224
  c.seed = 42;
  const MaskSet s = generate_mask_set(c);  // above the default budget: on demand
  CHECK(s.size() == 6000);
  CHECK_FALSE(s.materialized());
  std::vector<float> m(s.pixels());
  for (std::size_t i = 0; i < s.size(); i += 97) {
    s.fill(i, m);
    CHECK(*std::min_element(m.begin(), m.end()) >= 0.0f);
    CHECK(*std::max_element(m.begin(), m.end()) <= 1.0f);
  }
}

TEST_CASE("empirical_zero_rate") {
  MaskConfig c;
  c.grid_h = c.grid_w = c.target_h = c.target_w = 2;
  c.upsample = false;
  c.count = 3;
  CHECK(empirical_zero_rate(MaskSet::from_values(c, std::vector<float>(12, 1.0f)), 1, 1) == 0.0);
  CHECK(empirical_zero_rate(MaskSet::from_values(c, std::vector<float>(12, 0.0f)), 0, 1) == 1.0);
  CHECK_THROWS_AS(empirical_zero_rate(MaskSet::from_values(c, std::vector<float>(12, 0.0f)), 2, 0), RangeError);
  CHECK_THROWS_AS(empirical_zero_rate(MaskSet{}, 0, 0), ValidationError);

  MaskConfig b;
  b.grid_h = b.grid_w = b.target_h = b.target_w = 4;
  b.upsample = false;
  b.count = 6000;
  b.seed = 3;
  const MaskSet s = generate_mask_set(b);
  std::size_t zeros = 0;
  for (std::size_t i = 0; i < s.size(); ++i) zeros += generate_grid(b, i)[2 * 4 + 1] == 0;
  const double rate = empirical_zero_rate(s, 2, 1);
  CHECK(rate == doctest::Approx(zeros / 6000.0).epsilon(1e-12));
  CHECK(std::abs(rate - 0.9) <= 0.01);
}

TEST_CASE("enumerate_binary_masks covers every grid once") {
  const MaskSet s = enumerate_binary_masks(2, 2, 0.3);
  CHECK(s.size() == 16);
  const auto p = binary_mask_probabilities(s, 0.3);
  double total = 0.0;
  for (double v : p) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p[0] == doctest::Approx(0.7 * 0.7 * 0.7 * 0.7));
  CHECK(p[15] == doctest::Approx(0.3 * 0.3 * 0.3 * 0.3));
  CHECK_THROWS_AS(enumerate_binary_masks(5, 5, 0.1), EnumerationBoundError);
}

TEST_CASE("MSK1 round trip and malformed input") {
  const MaskSet s = generate_mask_set(small_config());
  const auto bytes = encode_msk1(s);
  CHECK(bytes.size() == 4 + 20 + 8 + 4 + 1 + s.size() * s.pixels() * 4);
  CHECK(std::equal(bytes.begin(), bytes.begin() + 4, "MSK1"));
  const MaskSet back = decode_msk1(bytes);
  CHECK(back.config().count == s.size());
  CHECK(back.config().seed == s.config().seed);
  CHECK(encode_msk1(back) == bytes);

  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_msk1(bad), FormatError);
  auto cut = bytes;
  cut.resize(cut.size() - 3);
  try {
    decode_msk1(cut);
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    CHECK(e.offset() == 37);
  }
}
