#include "scb/io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>

#include "scb/bytes.hpp"
#include "scb/errors.hpp"

namespace fs = std::filesystem;

namespace scb {

namespace {

ImageTensor from_interleaved(const std::uint8_t* px, std::size_t channels, std::size_t h,
                             std::size_t w, std::size_t maxval) {
  ImageTensor img(channels, h, w);
  const double scale = static_cast<double>(maxval);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < channels; ++c) {
        img.at(c, y, x) = static_cast<float>(px[(y * w + x) * channels + c] / scale);
      }
    }
  }
  return img;
}

ImageTensor decode_png(std::span<const std::uint8_t> bytes) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw IoError(std::string("PNG decode failed: ") + image.message);
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const std::size_t channels = color ? 3 : 1;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw IoError("PNG decode failed: " + msg);
  }
  return from_interleaved(buf.data(), channels, image.height, image.width, 255);
}

/// Binary PNM (P5 gray / P6 colour), maxval ≤ 255.
ImageTensor decode_pnm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 2;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto number = [&](const char* what) {
    skip_space();
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) throw FormatError(std::string("bad PNM ") + what, pos);
    std::size_t v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) v = v * 10 + (bytes[pos++] - '0');
    return v;
  };
  const std::size_t channels = bytes[1] == '6' ? 3 : 1;
  const std::size_t w = number("width");
  const std::size_t h = number("height");
  const std::size_t maxval = number("maxval");
  if (w == 0 || h == 0) throw FormatError("PNM has zero area", pos);
  if (maxval == 0 || maxval > 255) throw FormatError("only 8-bit PNM is supported", pos);
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw FormatError("bad PNM header", pos);
  ++pos;
  const std::size_t need = w * h * channels;
  if (bytes.size() - pos < need) throw FormatError("truncated PNM pixel data", bytes.size());
  return from_interleaved(bytes.data() + pos, channels, h, w, maxval);
}

std::vector<std::uint8_t> to_interleaved(const ImageTensor& image) {
  std::vector<std::uint8_t> px(image.data.size());
  for (std::size_t y = 0; y < image.height; ++y) {
    for (std::size_t x = 0; x < image.width; ++x) {
      for (std::size_t c = 0; c < image.channels; ++c) {
        const double v = std::clamp(static_cast<double>(image.at(c, y, x)), 0.0, 1.0);
        px[(y * image.width + x) * image.channels + c] = static_cast<std::uint8_t>(std::lround(v * 255.0));
      }
    }
  }
  return px;
}

bool has_suffix(const std::string& s, const std::string& suffix) {
  if (s.size() < suffix.size()) return false;
  std::string tail = s.substr(s.size() - suffix.size());
  std::transform(tail.begin(), tail.end(), tail.begin(), [](unsigned char c) { return std::tolower(c); });
  return tail == suffix;
}

}  // namespace

ImageTensor decode_image(std::span<const std::uint8_t> bytes, const std::string& name) {
  static constexpr std::uint8_t kPngSig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
  if (bytes.size() >= 8 && std::equal(kPngSig, kPngSig + 8, bytes.begin())) return decode_png(bytes);
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '6' || bytes[1] == '5')) {
    return decode_pnm(bytes);
  }
  throw FormatError("unsupported image format in " + name + " (expected PNG or binary PPM/PGM)", 0);
}

ImageTensor load_image(const std::string& path, std::size_t height, std::size_t width) {
  ImageTensor img = decode_image(read_file_bytes(path), path);
  if (height != 0 && width != 0) img = resize_image(img, height, width);
  img.source_path = path;
  img.image_id = fs::path(path).stem().string();
  return img;
}

std::vector<std::uint8_t> encode_png(const ImageTensor& image) {
  image.validate();
  png_image out{};
  out.version = PNG_IMAGE_VERSION;
  out.width = static_cast<png_uint_32>(image.width);
  out.height = static_cast<png_uint_32>(image.height);
  out.format = image.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const auto px = to_interleaved(image);
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&out, nullptr, &size, 0, px.data(), 0, nullptr)) {
    throw IoError(std::string("PNG encode failed: ") + out.message);
  }
  std::vector<std::uint8_t> buf(size);
  if (!png_image_write_to_memory(&out, buf.data(), &size, 0, px.data(), 0, nullptr)) {
    throw IoError(std::string("PNG encode failed: ") + out.message);
  }
  buf.resize(size);
  return buf;
}

std::vector<std::uint8_t> encode_ppm(const ImageTensor& image) {
  image.validate();
  const std::string header = std::string(image.channels == 3 ? "P6" : "P5") + "\n" +
                             std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  const auto px = to_interleaved(image);
  out.insert(out.end(), px.begin(), px.end());
  return out;
}

void save_image(const std::string& path, const ImageTensor& image) {
  if (has_suffix(path, ".png")) {
    write_file_bytes(path, encode_png(image));
  } else if (has_suffix(path, ".ppm") || has_suffix(path, ".pgm")) {
    write_file_bytes(path, encode_ppm(image));
  } else {
    throw ValidationError("cannot infer image format from " + path);
  }
}

Rgb heat_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const double pos = t * static_cast<double>(kHeatRamp.size() - 1);
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(pos), kHeatRamp.size() - 2);
  const double f = pos - static_cast<double>(i);
  Rgb c{};
  for (std::size_t k = 0; k < 3; ++k) {
    const double a = kHeatRamp[i][k];
    const double b = kHeatRamp[i + 1][k];
    c[k] = static_cast<std::uint8_t>(std::lround(a + (b - a) * f));
  }
  return c;
}

Heatmap heatmap_overlay(const ImageTensor& image, const SaliencyMap& map) {
  if (map.height != image.height || map.width != image.width ||
      map.scores.size() != image.pixels()) {
    throw ValidationError("saliency map dimensions do not match the image");
  }
  const auto [lo, hi] = std::minmax_element(map.scores.begin(), map.scores.end());
  const double min = *lo;
  const double range = *hi - *lo;
  Heatmap out;
  out.constant_map = !(range > 0.0);
  out.rgb = ImageTensor(3, image.height, image.width);
  out.rgb.image_id = image.image_id;
  const auto gray = channel_mean_intensity(image);
  for (std::size_t p = 0; p < image.pixels(); ++p) {
    const double t = out.constant_map ? 0.5 : (map.scores[p] - min) / range;
    const Rgb c = heat_color(t);
    const double g = gray[p] * 255.0;
    for (std::size_t k = 0; k < 3; ++k) {
      const auto v = std::lround(0.5 * c[k] + 0.5 * g);
      out.rgb.data[k * image.pixels() + p] = static_cast<float>(static_cast<double>(v) / 255.0);
    }
  }
  return out;
}

bool render_heatmap(const ImageTensor& image, const SaliencyMap& map, const std::string& out_path) {
  const Heatmap h = heatmap_overlay(image, map);
  if (h.constant_map) {
    std::cerr << "warning: saliency map is constant; heatmap rendered at mid-ramp\n";
  }
  write_file_bytes(out_path, encode_png(h.rgb));
  return !h.constant_map;
}

std::string curve_plot_svg(const std::vector<LabeledCurve>& curves, const std::string& title) {
  if (curves.empty()) throw ValidationError("no curves to plot");
  static constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                            "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
  constexpr double kW = 640, kH = 420, kLeft = 60, kRight = 20, kTop = 40, kBottom = 50;
  const double pw = kW - kLeft - kRight;
  const double ph = kH - kTop - kBottom;
  char buf[256];
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
     << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty()) {
    os << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
  }
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double v = i / 5.0;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\" font-size=\"11\">%.1f</text>\n",
                  kLeft + v * pw, kTop + ph + 16, v);
    os << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\" font-size=\"11\">%.1f</text>\n",
                  kLeft - 6, kTop + (1 - v) * ph + 4, v);
    os << buf;
  }
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\" font-size=\"12\">fraction of pixels</text>\n",
                kLeft + pw / 2, kH - 12);
  os << buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"14\" y=\"%.1f\" text-anchor=\"middle\" font-size=\"12\" "
                "transform=\"rotate(-90 14 %.1f)\">probability</text>\n",
                kTop + ph / 2, kTop + ph / 2);
  os << buf;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto& lc = curves[i];
    const char* color = kColors[i % std::size(kColors)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < lc.curve.points.size(); ++k) {
      const auto& p = lc.curve.points[k];
      std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", k ? " " : "", kLeft + p.fraction * pw,
                    kTop + (1 - std::clamp(p.probability, 0.0, 1.0)) * ph);
      os << buf;
    }
    os << "\"/>\n";
    const double ly = kTop + 16 + 16 * static_cast<double>(i);
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"%s\" stroke-width=\"2\"/>\n",
                  kLeft + pw - 190, ly - 4, kLeft + pw - 170, ly - 4, color);
    os << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.1f\" y=\"%.1f\" font-size=\"11\">%s %s (AUC=%.4f)</text>\n",
                  kLeft + pw - 165, ly, lc.label.c_str(), to_string(lc.curve.game).c_str(), auc(lc.curve));
    os << buf;
  }
  os << "</svg>\n";
  return os.str();
}

void export_curve_plot(const std::vector<LabeledCurve>& curves, const std::string& out_path,
                       const std::string& title) {
  write_text_file(out_path, curve_plot_svg(curves, title));
}

DatasetHandle open_dataset(const std::string& dir) {
  if (!fs::is_directory(dir)) throw IoError("dataset directory not found: " + dir);
  DatasetHandle ds;
  ds.root = dir;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string name = e.path().filename().string();
    if (has_suffix(name, ".png") || has_suffix(name, ".ppm") || has_suffix(name, ".pgm")) {
      files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::set<std::string> seen;
  for (const auto& f : files) {
    DatasetEntry entry;
    entry.image_id = f.stem().string();
    entry.path = f.string();
    if (!seen.insert(entry.image_id).second) {
      throw ValidationError("duplicate image id '" + entry.image_id + "' in " + dir);
    }
    const fs::path map = f.parent_path() / (entry.image_id + ".smap");
    if (fs::is_regular_file(map)) entry.map_path = map.string();
    ds.entries.push_back(std::move(entry));
  }
  if (ds.entries.empty()) throw ValidationError("dataset " + dir + " contains no images");
  return ds;
}

}  // namespace scb
