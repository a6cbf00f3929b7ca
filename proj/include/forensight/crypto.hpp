#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace forensight::crypto {

using Bytes = std::vector<std::uint8_t>;

inline std::span<const std::uint8_t> as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

std::string to_hex(std::span<const std::uint8_t> bytes);

std::string sha256_hex(std::span<const std::uint8_t> bytes);
Bytes hmac_sha256(std::span<const std::uint8_t> key, std::span<const std::uint8_t> message);

/// Constant-time equality.
bool equal(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::optional<Bytes> base64_decode(std::string_view text);

// RFC 4648 section 5 alphabet, no padding (JWT segments).
std::string base64url_encode(std::span<const std::uint8_t> bytes);
std::optional<Bytes> base64url_decode(std::string_view text);

Bytes random_bytes(std::size_t n);

/// Random RFC 4122 version-4 identifier, lower-case hex with dashes.
std::string new_id();

/// bcrypt ("$2b$") hash with a fresh per-hash salt. Cost is the log2 round
/// count, 4..31.
std::string hash_password(std::string_view password, int cost);
bool verify_password(std::string_view password, const std::string& hash);

}  // namespace forensight::crypto
