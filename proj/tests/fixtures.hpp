#pragma once

#include <algorithm>
#include <cstdint>

#include "scb/image.hpp"
#include "scb/rng.hpp"
#include "scb/scorer.hpp"

namespace scb::test {

inline ImageTensor random_image(std::size_t c, std::size_t h, std::size_t w, std::uint64_t seed) {
  ImageTensor img(c, h, w);
  CounterStream s(derive_seed(seed, "test-image"), 0);
  for (float& v : img.data) v = static_cast<float>(s.uniform());
  img.image_id = "img" + std::to_string(seed);
  return img;
}

inline Rect random_rect(CounterStream& s, std::size_t h, std::size_t w, std::size_t min_side,
                        std::size_t max_side) {
  const std::size_t rh = min_side + s.below(max_side - min_side + 1);
  const std::size_t rw = min_side + s.below(max_side - min_side + 1);
  const std::size_t y0 = s.below(h - rh + 1);
  const std::size_t x0 = s.below(w - rw + 1);
  return {y0, x0, y0 + rh, x0 + rw};
}

/// Dark textured background with one bright object; class 0 of the region
/// scorer looks at the object, classes 1..n-1 at random distractor boxes.
struct Scene {
  ImageTensor image;
  SyntheticSpec spec;
  Rect object;
};

inline Scene object_scene(std::size_t size, std::uint64_t seed, std::size_t n_classes = 3,
                          std::size_t channels = 1) {
  CounterStream s(derive_seed(seed, "test-scene"), 0);
  Scene sc;
  sc.object = random_rect(s, size, size, size / 4, size / 2);
  sc.image = ImageTensor(channels, size, size);
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t y = 0; y < size; ++y) {
      for (std::size_t x = 0; x < size; ++x) {
        const bool in = sc.object.contains(y, x);
        sc.image.at(c, y, x) = static_cast<float>(in ? 0.6 + 0.4 * s.uniform() : 0.3 * s.uniform());
      }
    }
  }
  sc.image.image_id = "scene" + std::to_string(seed);
  sc.spec.kind = SyntheticKind::region_mean;
  sc.spec.height = sc.spec.width = size;
  sc.spec.regions.push_back(sc.object);
  for (std::size_t k = 1; k < n_classes; ++k) sc.spec.regions.push_back(random_rect(s, size, size, size / 4, size / 2));
  return sc;
}

}  // namespace scb::test
