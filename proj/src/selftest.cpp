#include <cmath>
#include <ostream>

#include "scb/cli.hpp"
#include "scb/metrics.hpp"
#include "scb/rng.hpp"
#include "scb/saliency.hpp"

namespace scb {

namespace {

bool oracle_suite(std::ostream& out) {
  ImageTensor img(1, 3, 3);
  for (std::size_t i = 0; i < 9; ++i) img.data[i] = static_cast<float>(0.2 + 0.08 * i);
  SyntheticSpec spec;
  spec.kind = SyntheticKind::region_mean;
  spec.height = spec.width = 3;
  spec.regions = {{0, 0, 2, 2}, {1, 1, 3, 3}};
  const auto scorer = region_mean_scorer(spec);

  const double p = 0.1;
  const MaskSet all = enumerate_binary_masks(3, 3, p);
  const auto weights = binary_mask_probabilities(all, p);
  EstimatorOptions opts;
  opts.mask_weights = weights;
  const SaliencyMap mc = shape_scores(img, all, *scorer, 0, opts);
  MaskConfig cfg = all.config();
  const SaliencyMap exact = exact_necessity(img, cfg, *scorer, 0);
  double worst = 0.0;
  for (std::size_t i = 0; i < 9; ++i) worst = std::max(worst, std::abs(mc.scores[i] - exact.scores[i]));
  const bool ok = worst <= 1e-6;
  out << (ok ? "PASS" : "FAIL") << "  exhaustive oracle: max |weighted SHAPE - exact| = " << worst << "\n";
  return ok;
}

bool linear_suite(std::ostream& out) {
  const std::size_t n = 4;
  const double p = 0.1;
  auto spec = random_linear_spec(1, n, n, 7, 1.0, Link::identity);
  const auto scorer = linear_softmax_scorer(spec);
  ImageTensor img(1, n, n);
  CounterStream s(derive_seed(11, "selftest-image"), 0);
  for (float& v : img.data) v = static_cast<float>(s.uniform());
  MaskConfig cfg;
  cfg.grid_h = cfg.grid_w = cfg.target_h = cfg.target_w = n;
  cfg.keep_prob = p;
  cfg.upsample = false;
  cfg.count = 1;
  const SaliencyMap exact = exact_necessity(img, cfg, *scorer, 0);
  double total = 0.0;
  std::vector<double> contrib(n * n);
  for (std::size_t i = 0; i < n * n; ++i) {
    contrib[i] = spec.weights[i] * static_cast<double>(img.data[i]);
    total += contrib[i];
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < n * n; ++i) {
    const double want = contrib[i] + (1 - p) * (total - contrib[i]);
    worst = std::max(worst, std::abs(exact.scores[i] - want));
  }
  SaliencyMap truth = exact;
  truth.scores = contrib;
  const bool order_ok = rank_pixels(exact) == rank_pixels(truth);
  const bool ok = worst <= 1e-9 && order_ok;
  out << (ok ? "PASS" : "FAIL") << "  linear closed form: max error " << worst
      << ", ranking " << (order_ok ? "matches" : "differs") << "\n";
  return ok;
}

bool auc_suite(std::ostream& out) {
  bool ok = true;
  ProbabilityCurve c;
  for (std::size_t k = 0; k <= 10; ++k) c.points.push_back({k / 10.0, 0.37});
  c.points.back().fraction = 1.0;
  ok &= auc(c) == 0.37;
  c.points = {{0, 0}, {1, 1}};
  ok &= auc(c) == 0.5;
  c.points = {{0, 1}, {0.5, 1}, {1, 0}};
  ok &= auc(c) == 0.75;
  CounterStream s(derive_seed(3, "selftest-auc"), 0);
  for (int trial = 0; trial < 10000 && ok; ++trial) {
    const std::size_t k = 1 + s.below(40);
    c.points.assign(k + 1, {});
    for (std::size_t i = 0; i <= k; ++i) c.points[i] = {static_cast<double>(i) / k, s.uniform()};
    c.points.back().fraction = 1.0;
    const double a = auc(c);
    ok &= a >= 0.0 && a <= 1.0;
  }
  out << (ok ? "PASS" : "FAIL") << "  AUC algebra and bounds (10000 random curves)\n";
  return ok;
}

}  // namespace

bool run_selftest(std::ostream& out) {
  bool ok = oracle_suite(out);
  ok = linear_suite(out) && ok;
  ok = auc_suite(out) && ok;
  out << (ok ? "selftest passed\n" : "selftest FAILED\n");
  return ok;
}

}  // namespace scb
