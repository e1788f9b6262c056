#include "scb/mask_file.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>

#include "scb/bytes.hpp"
#include "scb/errors.hpp"

namespace scb {

namespace {

// Shortest decimal that rounds to `f`, so 0.1 written as f32 reads back as 0.1.
double widen(float f) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf - 1, f);
  *res.ptr = '\0';
  return std::strtod(buf, nullptr);
}

constexpr std::size_t kHeaderBytes = 4 + 5 * 4 + 8 + 4 + 1;

ByteWriter header(const MaskConfig& c) {
  ByteWriter w;
  w.raw("MSK1", 4);
  for (std::size_t v : {c.count, c.grid_h, c.grid_w, c.target_h, c.target_w}) {
    w.le(static_cast<std::uint32_t>(v));
  }
  w.le<std::uint64_t>(c.seed);
  w.le(static_cast<float>(c.keep_prob));
  w.le<std::uint8_t>(c.upsample ? 1 : 0);
  return w;
}

}  // namespace

std::vector<std::uint8_t> encode_msk1(const MaskSet& set) {
  ByteWriter w = header(set.config());
  w.bytes().reserve(kHeaderBytes + set.config().materialized_bytes());
  std::vector<float> m(set.pixels());
  for (std::size_t i = 0; i < set.size(); ++i) {
    set.fill(i, m);
    w.floats(m);
  }
  return std::move(w.bytes());
}

MaskSet decode_msk1(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const auto magic = r.take(4, "magic");
  if (!std::equal(magic.begin(), magic.end(), "MSK1")) throw FormatError("bad MSK1 magic", 0);
  MaskConfig c;
  c.count = r.le<std::uint32_t>("count");
  c.grid_h = r.le<std::uint32_t>("grid_h");
  c.grid_w = r.le<std::uint32_t>("grid_w");
  c.target_h = r.le<std::uint32_t>("target_h");
  c.target_w = r.le<std::uint32_t>("target_w");
  c.seed = r.le<std::uint64_t>("seed");
  c.keep_prob = widen(r.le<float>("keep_prob"));
  const std::size_t flag_at = r.offset();
  const auto flag = r.le<std::uint8_t>("upsample flag");
  if (flag > 1) throw FormatError("upsample flag must be 0 or 1", flag_at);
  c.upsample = flag == 1;
  try {
    c.validate();
  } catch (const ValidationError& e) {
    throw FormatError(std::string("invalid MSK1 header: ") + e.what(), flag_at);
  }
  std::vector<float> values(c.count * c.pixels());
  r.floats(values, "mask values");
  if (r.remaining() != 0) throw FormatError("trailing bytes after MSK1 masks", r.offset());
  return MaskSet::from_values(c, std::move(values));
}

void write_mask_file(const std::string& path, const MaskSet& set) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  const ByteWriter h = header(set.config());
  out.write(reinterpret_cast<const char*>(h.bytes().data()), static_cast<std::streamsize>(h.bytes().size()));
  std::vector<float> m(set.pixels());
  for (std::size_t i = 0; i < set.size(); ++i) {
    set.fill(i, m);
    ByteWriter w;
    w.floats(m);
    out.write(reinterpret_cast<const char*>(w.bytes().data()), static_cast<std::streamsize>(w.bytes().size()));
  }
  if (!out) throw IoError("short write to " + path);
}

MaskSet read_mask_file(const std::string& path) { return decode_msk1(read_file_bytes(path)); }

}  // namespace scb
