// Serial reference vs OpenMP kernels on paper-sized masks.
//   bench_kernels [masks] [workers]

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <vector>

#include "scb/image.hpp"
#include "scb/kernels.hpp"
#include "scb/mask.hpp"

using namespace scb;

namespace {

double best_of(int reps, const std::function<void()>& fn) {
  double best = 1e30;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void row(const char* name, double serial, double omp) {
  std::printf("%-10s %10.2f ms %10.2f ms %8.2fx\n", name, serial * 1e3, omp * 1e3, serial / omp);
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 64;
  const int workers = resolve_workers(argc > 2 ? std::atoi(argv[2]) : 0);
  MaskConfig c;
  c.count = n;
  const std::size_t px = c.target_h * c.target_w;

  ImageTensor img(3, c.target_h, c.target_w);
  for (std::size_t i = 0; i < img.data.size(); ++i) img.data[i] = static_cast<float>(i % 251) / 250.0f;
  std::vector<float> masks(n * px), masked(n * img.data.size());
  std::vector<double> values(n), num(px), den(px);
  for (std::size_t i = 0; i < n; ++i) values[i] = 0.01 * static_cast<double>(i % 17);

  std::printf("%zu masks of %zux%zu, %d workers\n", n, c.target_h, c.target_w, workers);
  std::printf("%-10s %13s %13s %9s\n", "kernel", "serial", "openmp", "speedup");
  row("render", best_of(3, [&] { kernels::serial::render_masks(c, 0, n, masks); }),
      best_of(3, [&] { kernels::render_masks(c, 0, n, masks, workers); }));
  row("apply", best_of(3, [&] { kernels::serial::apply_masks(img, masks, n, masked); }),
      best_of(3, [&] { kernels::apply_masks(img, masks, n, masked, workers); }));
  row("accumulate",
      best_of(3, [&] { kernels::serial::accumulate(masks, n, px, values, {}, kernels::Weighting::absent, num, den); }),
      best_of(3, [&] { kernels::accumulate(masks, n, px, values, {}, kernels::Weighting::absent, num, den, workers); }));
  return 0;
}
