#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scb/image.hpp"
#include "scb/metrics.hpp"
#include "scb/saliency.hpp"

namespace scb {

/// Decodes a PNG or 8-bit binary PPM/PGM, scales to [0,1] and bilinearly
/// resizes to (height, width). Zero target dimensions keep the native size.
ImageTensor load_image(const std::string& path, std::size_t height = 0, std::size_t width = 0);
ImageTensor decode_image(std::span<const std::uint8_t> bytes, const std::string& name);

std::vector<std::uint8_t> encode_png(const ImageTensor& image);
std::vector<std::uint8_t> encode_ppm(const ImageTensor& image);
/// Writes PNG or PPM/PGM depending on the extension of `path`.
void save_image(const std::string& path, const ImageTensor& image);

using Rgb = std::array<std::uint8_t, 3>;

/// Blue → cyan → green → yellow → red, evenly spaced on [0,1].
inline constexpr std::array<Rgb, 5> kHeatRamp = {{
    {0, 0, 255}, {0, 255, 255}, {0, 255, 0}, {255, 255, 0}, {255, 0, 0},
}};

Rgb heat_color(double t);

struct Heatmap {
  ImageTensor rgb;  // 3×H×W overlay
  bool constant_map = false;
};

/// Min-max normalised map through kHeatRamp, blended at alpha 0.5 over the
/// grayscale image. A constant map renders at mid-ramp.
Heatmap heatmap_overlay(const ImageTensor& image, const SaliencyMap& map);
/// Writes heatmap_overlay as PNG. Returns false (and warns on stderr) for a
/// constant map.
bool render_heatmap(const ImageTensor& image, const SaliencyMap& map, const std::string& out_path);

struct LabeledCurve {
  std::string label;
  ProbabilityCurve curve;
};

/// SVG line plot of probability against fraction, one polyline per curve,
/// legend entries carrying each curve's AUC.
std::string curve_plot_svg(const std::vector<LabeledCurve>& curves, const std::string& title = "");
void export_curve_plot(const std::vector<LabeledCurve>& curves, const std::string& out_path,
                       const std::string& title = "");

struct DatasetEntry {
  std::string image_id;
  std::string path;
  std::optional<std::string> map_path;
};

struct DatasetHandle {
  std::string root;
  std::vector<DatasetEntry> entries;
};

/// Every *.png/*.ppm/*.pgm in `dir`, sorted by file name; image_id is the
/// stem and `<stem>.smap` next to an image is its external map.
DatasetHandle open_dataset(const std::string& dir);

}  // namespace scb
