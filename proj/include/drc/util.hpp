// util.hpp
// Stable hashing and exact double <-> text conversion used by the file formats.

#ifndef DRC_UTIL_HPP
#define DRC_UTIL_HPP

#include <cstdint>
#include <string>
#include <string_view>

namespace drc {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

/// FNV-1a over a byte string. Stable across platforms, used for vocabulary
/// fingerprints and artifact checksums; not cryptographic.
inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t state = kFnvOffset) {
  for (unsigned char c : bytes) {
    state ^= c;
    state *= kFnvPrime;
  }
  return state;
}

std::string to_hex(std::uint64_t value);
std::uint64_t from_hex(std::string_view hex);

/// FNV-1a over the raw bytes of a file. Throws FormatError if unreadable.
std::uint64_t file_checksum(const std::string& path);

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double value);

/// Strict parse of an entire token as a double. Throws FormatError otherwise.
double parse_double(std::string_view text, std::string_view context);

/// Strict parse of an entire token as a non-negative integer.
std::uint64_t parse_uint(std::string_view text, std::string_view context);

std::string lowercase_ascii(std::string_view word);

}  // namespace drc

#endif  // DRC_UTIL_HPP
