#include "drc/util.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <system_error>

#include "drc/error.hpp"

namespace drc {

std::string to_hex(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[value & 0xf];
    value >>= 4;
  }
  return out;
}

std::uint64_t from_hex(std::string_view hex) {
  std::uint64_t value = 0;
  if (hex.empty() || hex.size() > 16) {
    throw FormatError("invalid hex value '" + std::string(hex) + "'");
  }
  for (char c : hex) {
    value <<= 4;
    if (c >= '0' && c <= '9') {
      value |= static_cast<std::uint64_t>(c - '0');
    } else if (c >= 'a' && c <= 'f') {
      value |= static_cast<std::uint64_t>(c - 'a' + 10);
    } else {
      throw FormatError("invalid hex value '" + std::string(hex) + "'");
    }
  }
  return value;
}

std::uint64_t file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError("cannot open file for checksum: " + path);
  }
  std::uint64_t state = kFnvOffset;
  char buf[8192];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    state = fnv1a(std::string_view(buf, static_cast<std::size_t>(in.gcount())), state);
  }
  return state;
}

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, std::string_view context) {
  double value = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw FormatError(std::string(context) + ": expected a number, got '" +
                      std::string(text) + "'");
  }
  return value;
}

std::uint64_t parse_uint(std::string_view text, std::string_view context) {
  std::uint64_t value = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw FormatError(std::string(context) + ": expected a non-negative integer, got '" +
                      std::string(text) + "'");
  }
  return value;
}

std::string lowercase_ascii(std::string_view word) {
  std::string out(word);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

}  // namespace drc
