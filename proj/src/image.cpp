#include "scb/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "scb/errors.hpp"

namespace scb {

void ImageTensor::validate() const {
  if (channels != 1 && channels != 3) {
    throw ValidationError("image must have 1 or 3 channels, got " + std::to_string(channels));
  }
  if (height == 0 || width == 0) throw ValidationError("image has zero area");
  if (data.size() != channels * height * width) {
    throw ValidationError("image buffer size does not match C*H*W");
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!(data[i] >= 0.0f && data[i] <= 1.0f)) {
      throw ValidationError("image value out of [0,1] at flat index " + std::to_string(i));
    }
  }
}

namespace {

struct Tap {
  std::size_t lo;
  std::size_t hi;
  double frac;
};

std::vector<Tap> make_taps(std::size_t in, std::size_t out) {
  std::vector<Tap> taps(out);
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  const double last = static_cast<double>(in - 1);
  for (std::size_t o = 0; o < out; ++o) {
    double s = (static_cast<double>(o) + 0.5) * scale - 0.5;
    s = std::clamp(s, 0.0, last);
    const auto lo = static_cast<std::size_t>(std::floor(s));
    const std::size_t hi = std::min(lo + 1, in - 1);
    taps[o] = {lo, hi, s - static_cast<double>(lo)};
  }
  return taps;
}

}  // namespace

void bilinear_resize(std::span<const float> src, std::size_t src_h, std::size_t src_w,
                     std::span<float> dst, std::size_t dst_h, std::size_t dst_w) {
  const auto ty = make_taps(src_h, dst_h);
  const auto tx = make_taps(src_w, dst_w);
  for (std::size_t y = 0; y < dst_h; ++y) {
    const Tap& a = ty[y];
    const float* r0 = src.data() + a.lo * src_w;
    const float* r1 = src.data() + a.hi * src_w;
    for (std::size_t x = 0; x < dst_w; ++x) {
      const Tap& b = tx[x];
      const double top = r0[b.lo] + (r0[b.hi] - static_cast<double>(r0[b.lo])) * b.frac;
      const double bot = r1[b.lo] + (r1[b.hi] - static_cast<double>(r1[b.lo])) * b.frac;
      dst[y * dst_w + x] = static_cast<float>(top + (bot - top) * a.frac);
    }
  }
}

ImageTensor resize_image(const ImageTensor& img, std::size_t h, std::size_t w) {
  if (img.height == h && img.width == w) return img;
  ImageTensor out(img.channels, h, w);
  out.image_id = img.image_id;
  out.source_path = img.source_path;
  for (std::size_t c = 0; c < img.channels; ++c) {
    bilinear_resize(img.plane(c), img.height, img.width, out.plane(c), h, w);
  }
  return out;
}

std::vector<float> channel_mean_intensity(const ImageTensor& img) {
  std::vector<float> out(img.pixels(), 0.0f);
  if (img.channels == 1) {
    std::copy(img.data.begin(), img.data.end(), out.begin());
    return out;
  }
  for (std::size_t p = 0; p < img.pixels(); ++p) {
    double s = 0.0;
    for (std::size_t c = 0; c < img.channels; ++c) s += img.data[c * img.pixels() + p];
    out[p] = static_cast<float>(s / static_cast<double>(img.channels));
  }
  return out;
}

ImageTensor gaussian_blur(const ImageTensor& img, double sigma) {
  if (!(sigma > 0.0)) throw ValidationError("blur sigma must be positive");
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * static_cast<double>(i * i) / (sigma * sigma));
    kernel[static_cast<std::size_t>(i + radius)] = v;
    total += v;
  }
  for (double& v : kernel) v /= total;

  const auto h = static_cast<std::ptrdiff_t>(img.height);
  const auto w = static_cast<std::ptrdiff_t>(img.width);
  ImageTensor out = img;
  std::vector<double> tmp(img.pixels());
  for (std::size_t c = 0; c < img.channels; ++c) {
    auto src = img.plane(c);
    auto dst = out.plane(c);
    for (std::ptrdiff_t y = 0; y < h; ++y) {
      for (std::ptrdiff_t x = 0; x < w; ++x) {
        double acc = 0.0;
        for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
          const auto xx = std::clamp<std::ptrdiff_t>(x + k, 0, w - 1);
          acc += kernel[static_cast<std::size_t>(k + radius)] * src[static_cast<std::size_t>(y * w + xx)];
        }
        tmp[static_cast<std::size_t>(y * w + x)] = acc;
      }
    }
    for (std::ptrdiff_t y = 0; y < h; ++y) {
      for (std::ptrdiff_t x = 0; x < w; ++x) {
        double acc = 0.0;
        for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
          const auto yy = std::clamp<std::ptrdiff_t>(y + k, 0, h - 1);
          acc += kernel[static_cast<std::size_t>(k + radius)] * tmp[static_cast<std::size_t>(yy * w + x)];
        }
        dst[static_cast<std::size_t>(y * w + x)] = static_cast<float>(std::clamp(acc, 0.0, 1.0));
      }
    }
  }
  return out;
}

}  // namespace scb
