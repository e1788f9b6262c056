#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace scb {

/// C×H×W image with values in [0,1], channel-planar, each plane row-major.
struct ImageTensor {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> data;
  std::string image_id;
  std::string source_path;

  ImageTensor() = default;
  ImageTensor(std::size_t c, std::size_t h, std::size_t w, float fill = 0.0f)
      : channels(c), height(h), width(w), data(c * h * w, fill) {}

  std::size_t pixels() const noexcept { return height * width; }

  float& at(std::size_t c, std::size_t y, std::size_t x) {
    return data[(c * height + y) * width + x];
  }
  float at(std::size_t c, std::size_t y, std::size_t x) const {
    return data[(c * height + y) * width + x];
  }

  std::span<float> plane(std::size_t c) { return {data.data() + c * pixels(), pixels()}; }
  std::span<const float> plane(std::size_t c) const {
    return {data.data() + c * pixels(), pixels()};
  }

  bool same_shape(const ImageTensor& o) const noexcept {
    return channels == o.channels && height == o.height && width == o.width;
  }

  /// Throws ValidationError unless C ∈ {1,3}, sizes match and values lie in [0,1].
  void validate() const;
};

/// Bilinear resampling of one row-major plane with half-pixel-centre
/// alignment and clamped edges. Output values stay within the input range.
void bilinear_resize(std::span<const float> src, std::size_t src_h, std::size_t src_w,
                     std::span<float> dst, std::size_t dst_h, std::size_t dst_w);

/// Resizes every channel of `img` to (h, w). Returns a copy when sizes match.
ImageTensor resize_image(const ImageTensor& img, std::size_t h, std::size_t w);

/// Per-pixel mean over channels, length H·W.
std::vector<float> channel_mean_intensity(const ImageTensor& img);

/// Separable Gaussian blur, radius ceil(3σ), clamped edges.
ImageTensor gaussian_blur(const ImageTensor& img, double sigma);

}  // namespace scb
