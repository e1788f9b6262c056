#include "scb/saliency.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <exception>
#include <string>

#include "scb/bytes.hpp"
#include "scb/digest.hpp"
#include "scb/errors.hpp"
#include "scb/kernels.hpp"

namespace scb {

std::string to_string(Method m) {
  switch (m) {
    case Method::shape: return "shape";
    case Method::rise: return "rise";
    case Method::external: return "external";
    case Method::exact: return "exact";
  }
  return "unknown";
}

Method parse_method(const std::string& s) {
  if (s == "shape") return Method::shape;
  if (s == "rise") return Method::rise;
  if (s == "external") return Method::external;
  if (s == "exact") return Method::exact;
  throw ValidationError("unknown method '" + s + "'");
}

std::uint64_t config_digest(const MaskConfig& c, const std::string& scorer_identity) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "grid=%zux%zu;keep=%.17g;count=%zu;target=%zux%zu;seed=%llu;upsample=%d|",
                c.grid_h, c.grid_w, c.keep_prob, c.count, c.target_h, c.target_w,
                static_cast<unsigned long long>(c.seed), c.upsample ? 1 : 0);
  return digest64(std::string(buf) + scorer_identity);
}

namespace {

void check_estimator_inputs(const ImageTensor& image, const MaskSet& masks, const Scorer& scorer,
                            std::size_t class_id, const EstimatorOptions& opts) {
  image.validate();
  scorer.check_input({image.channels, image.height, image.width});
  if (class_id >= scorer.n_classes()) {
    throw ValidationError("class " + std::to_string(class_id) + " out of range for " +
                          std::to_string(scorer.n_classes()) + " classes");
  }
  if (masks.size() == 0) throw ValidationError("empty mask set");
  if (masks.config().target_h != image.height || masks.config().target_w != image.width) {
    throw ValidationError("mask dimensions do not match the image");
  }
  if (!opts.mask_weights.empty() && opts.mask_weights.size() != masks.size()) {
    throw ValidationError("mask weight count does not match mask count");
  }
  if (opts.batch_size == 0) throw ValidationError("batch size must be positive");
}

enum class Estimator { necessity, sufficiency };

EstimatorResult estimate(Estimator kind, const ImageTensor& image, const MaskSet& masks,
                         const Scorer& scorer, std::size_t class_id, const EstimatorOptions& opts) {
  check_estimator_inputs(image, masks, scorer, class_id, opts);
  const std::size_t pixels = image.pixels();
  const std::size_t volume = image.data.size();
  const std::size_t total = masks.size();
  const int workers = opts.serial ? 1 : resolve_workers(opts.workers);
  const std::size_t batch = opts.batch_size;
  const std::size_t round = batch * static_cast<std::size_t>(workers);
  const auto weighting =
      kind == Estimator::necessity ? kernels::Weighting::absent : kernels::Weighting::present;

  const double p_orig = kind == Estimator::necessity ? scorer.score_one(image).at(class_id) : 0.0;

  EstimatorResult out;
  out.numerators.assign(pixels, 0.0);
  out.denominators.assign(pixels, 0.0);

  std::vector<float> mask_buf;
  std::vector<float> masked(std::min(round, total) * volume);
  std::vector<double> values(std::min(round, total));

  for (std::size_t first = 0; first < total; first += round) {
    const std::size_t n = std::min(round, total - first);
    std::span<const float> block;
    if (masks.materialized()) {
      block = masks.block(first, n);
    } else {
      mask_buf.resize(n * pixels);
      if (opts.serial) {
        kernels::serial::render_masks(masks.config(), first, n, mask_buf);
      } else {
        kernels::render_masks(masks.config(), first, n, mask_buf, workers);
      }
      block = mask_buf;
    }

    const auto chunks = static_cast<std::ptrdiff_t>((n + batch - 1) / batch);
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) num_threads(workers)
    for (std::ptrdiff_t k = 0; k < chunks; ++k) {
      const std::size_t lo = static_cast<std::size_t>(k) * batch;
      const std::size_t m = std::min(batch, n - lo);
      try {
        std::span<float> dst(masked.data() + lo * volume, m * volume);
        kernels::serial::apply_masks(image, block.subspan(lo * pixels, m * pixels), m, dst);
        const ScoreRows rows =
            scorer.score({{image.channels, image.height, image.width}, m, dst});
        if (rows.size() != m) throw ProtocolError("scorer returned a short batch");
        for (std::size_t j = 0; j < m; ++j) {
          const double p = rows[j].at(class_id);
          values[lo + j] = kind == Estimator::necessity ? prediction_shift(p_orig, p) : p;
        }
      } catch (...) {
#pragma omp critical(scb_estimator_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);

    const auto w = opts.mask_weights.empty() ? std::span<const double>{}
                                             : opts.mask_weights.subspan(first, n);
    const std::span<const double> vals(values.data(), n);
    if (opts.serial) {
      kernels::serial::accumulate(block, n, pixels, vals, w, weighting, out.numerators,
                                  out.denominators);
    } else {
      kernels::accumulate(block, n, pixels, vals, w, weighting, out.numerators, out.denominators,
                          workers);
    }
  }

  SaliencyMap& map = out.map;
  map.height = image.height;
  map.width = image.width;
  map.class_id = class_id;
  map.method = kind == Estimator::necessity ? Method::shape : Method::rise;
  map.image_id = image.image_id;
  map.config_digest = config_digest(masks.config(), scorer.identity());
  map.scores.assign(pixels, 0.0);

  double analytic = 0.0;
  if (opts.normalization == Normalization::analytic) {
    double weight_sum = 0.0;
    if (opts.mask_weights.empty()) {
      weight_sum = static_cast<double>(total);
    } else {
      for (double v : opts.mask_weights) weight_sum += v;
    }
    const double p = masks.config().keep_prob;
    analytic = (kind == Estimator::necessity ? 1.0 - p : p) * weight_sum;
  }
  for (std::size_t i = 0; i < pixels; ++i) {
    const double den = opts.normalization == Normalization::analytic ? analytic : out.denominators[i];
    if (out.denominators[i] == 0.0 || den == 0.0) {
      ++map.degenerate_pixels;
      continue;
    }
    map.scores[i] = out.numerators[i] / den;
  }
  return out;
}

}  // namespace

EstimatorResult shape_estimate(const ImageTensor& image, const MaskSet& masks, const Scorer& scorer,
                               std::size_t class_id, const EstimatorOptions& opts) {
  return estimate(Estimator::necessity, image, masks, scorer, class_id, opts);
}

SaliencyMap shape_scores(const ImageTensor& image, const MaskSet& masks, const Scorer& scorer,
                         std::size_t class_id, const EstimatorOptions& opts) {
  return shape_estimate(image, masks, scorer, class_id, opts).map;
}

EstimatorResult rise_estimate(const ImageTensor& image, const MaskSet& masks, const Scorer& scorer,
                              std::size_t class_id, const EstimatorOptions& opts) {
  return estimate(Estimator::sufficiency, image, masks, scorer, class_id, opts);
}

SaliencyMap rise_scores(const ImageTensor& image, const MaskSet& masks, const Scorer& scorer,
                        std::size_t class_id, const EstimatorOptions& opts) {
  return rise_estimate(image, masks, scorer, class_id, opts).map;
}

SaliencyMap exact_necessity(const ImageTensor& image, const MaskConfig& config, const Scorer& scorer,
                            std::size_t class_id) {
  if (config.upsample) throw ValidationError("exact necessity needs upsample = false");
  const std::size_t cells = config.grid_h * config.grid_w;
  if (cells > kMaxEnumerationCells) {
    throw EnumerationBoundError("exact necessity enumerates at most 2^" +
                                std::to_string(kMaxEnumerationCells) + " masks (" +
                                std::to_string(kMaxEnumerationCells) + " cells), grid has " +
                                std::to_string(cells));
  }
  if (!(config.keep_prob > 0.0 && config.keep_prob < 1.0)) {
    throw ValidationError("keep probability must lie in (0,1)");
  }
  image.validate();
  if (image.height != config.grid_h || image.width != config.grid_w) {
    throw ValidationError("image must be at grid resolution for exact enumeration");
  }
  scorer.check_input({image.channels, image.height, image.width});
  if (class_id >= scorer.n_classes()) throw ValidationError("class out of range");

  const double p = config.keep_prob;
  const double f_orig = scorer.score_one(image).at(class_id);
  const std::size_t n_masks = std::size_t{1} << cells;
  const std::size_t volume = image.data.size();
  constexpr std::size_t kChunk = 4096;

  std::vector<double> acc(cells, 0.0);
  std::vector<float> batch;
  for (std::size_t first = 0; first < n_masks; first += kChunk) {
    const std::size_t n = std::min(kChunk, n_masks - first);
    batch.assign(n * volume, 0.0f);
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t m = first + j;
      for (std::size_t c = 0; c < image.channels; ++c) {
        for (std::size_t l = 0; l < cells; ++l) {
          if ((m >> l) & 1U) batch[j * volume + c * cells + l] = image.data[c * cells + l];
        }
      }
    }
    const ScoreRows rows = scorer.score({{image.channels, image.height, image.width}, n, batch});
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t m = first + j;
      const auto ones = static_cast<std::size_t>(std::popcount(m));
      const double prob = std::pow(p, static_cast<double>(ones)) *
                          std::pow(1.0 - p, static_cast<double>(cells - ones));
      const double shift = prediction_shift(f_orig, rows[j].at(class_id));
      for (std::size_t l = 0; l < cells; ++l) {
        if (((m >> l) & 1U) == 0) acc[l] += shift * prob;
      }
    }
  }

  SaliencyMap map;
  map.height = config.grid_h;
  map.width = config.grid_w;
  map.class_id = class_id;
  map.method = Method::exact;
  map.image_id = image.image_id;
  map.config_digest = config_digest(config, scorer.identity());
  map.scores.resize(cells);
  for (std::size_t l = 0; l < cells; ++l) map.scores[l] = acc[l] / (1.0 - p);
  return map;
}

std::vector<std::uint8_t> encode_smap(const SaliencyMap& map) {
  if (map.scores.size() != map.height * map.width) {
    throw ValidationError("saliency map size does not match its dimensions");
  }
  ByteWriter w;
  w.raw("SMAP", 4);
  w.le<std::uint16_t>(1);
  w.le(static_cast<std::uint32_t>(map.height));
  w.le(static_cast<std::uint32_t>(map.width));
  w.le(static_cast<std::uint32_t>(map.class_id));
  w.le(static_cast<std::uint8_t>(map.method));
  w.le<std::uint64_t>(map.config_digest);
  std::vector<float> f(map.scores.begin(), map.scores.end());
  w.floats(f);
  return std::move(w.bytes());
}

SaliencyMap decode_smap(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const auto magic = r.take(4, "magic");
  if (!std::equal(magic.begin(), magic.end(), "SMAP")) throw FormatError("bad SMAP magic", 0);
  const std::size_t version_at = r.offset();
  if (const auto v = r.le<std::uint16_t>("version"); v != 1) {
    throw FormatError("unsupported SMAP version " + std::to_string(v), version_at);
  }
  SaliencyMap map;
  map.height = r.le<std::uint32_t>("height");
  map.width = r.le<std::uint32_t>("width");
  map.class_id = r.le<std::uint32_t>("class id");
  const std::size_t method_at = r.offset();
  const auto code = r.le<std::uint8_t>("method");
  if (code > static_cast<std::uint8_t>(Method::exact)) {
    throw FormatError("unknown SMAP method code " + std::to_string(code), method_at);
  }
  map.method = static_cast<Method>(code);
  map.config_digest = r.le<std::uint64_t>("config digest");
  if (map.height == 0 || map.width == 0) throw FormatError("SMAP has zero area", 4 + 2);
  std::vector<float> f(map.height * map.width);
  r.floats(f, "scores");
  if (r.remaining() != 0) throw FormatError("trailing bytes after SMAP scores", r.offset());
  map.scores.assign(f.begin(), f.end());
  return map;
}

void save_map(const std::string& path, const SaliencyMap& map) {
  write_file_bytes(path, encode_smap(map));
}

SaliencyMap load_external_map(const std::string& path) {
  SaliencyMap map = decode_smap(read_file_bytes(path));
  map.method = Method::external;
  return map;
}

}  // namespace scb
