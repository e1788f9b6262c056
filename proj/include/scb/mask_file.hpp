#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "scb/mask.hpp"

namespace scb {

// MSK1: "MSK1", u32 count, grid_h, grid_w, target_h, target_w, u64 seed,
// f32 keep_prob, u8 upsample, then count·target_h·target_w f32 values,
// mask-major then row-major; all little-endian.
std::vector<std::uint8_t> encode_msk1(const MaskSet& set);
MaskSet decode_msk1(std::span<const std::uint8_t> bytes);

/// Streams masks to disk one at a time, so on-demand sets never materialize.
void write_mask_file(const std::string& path, const MaskSet& set);
MaskSet read_mask_file(const std::string& path);

}  // namespace scb
