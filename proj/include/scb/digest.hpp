#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace scb {

std::string sha256_hex(std::string_view data);

/// First 8 bytes of SHA-256, big-endian.
std::uint64_t digest64(std::string_view data);

std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Throws ValidationError on malformed input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

std::string hex64(std::uint64_t v);

}  // namespace scb
