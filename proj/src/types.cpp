#include "videodna/types.hpp"

#include <cctype>

namespace videodna {

namespace {
constexpr char kHexDigits[] = "0123456789ABCDEF";

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return -1;
}
}  // namespace

std::string Bitcode::to_hex() const {
  std::string out;
  out.reserve(bytes_.size() * 2);
  for (uint8_t b : bytes_) {
    out.push_back(kHexDigits[b >> 4]);
    out.push_back(kHexDigits[b & 0xF]);
  }
  return out;
}

Bitcode Bitcode::from_hex(const std::string& hex, uint32_t n_bits) {
  Bitcode code(n_bits);
  if (hex.size() != code.bytes_.size() * 2)
    fail(Errc::bad_format, "hex bitcode has wrong length");
  for (std::size_t i = 0; i < code.bytes_.size(); ++i) {
    const int hi = hex_value(hex[2 * i]);
    const int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) fail(Errc::bad_format, "invalid hex digit in bitcode");
    code.bytes_[i] = uint8_t((hi << 4) | lo);
  }
  // bits past n_bits in the last byte must stay clear
  const uint32_t tail = n_bits & 7;
  if (tail != 0) {
    const uint8_t mask = uint8_t(0xFFu << (8 - tail));
    code.bytes_.back() &= mask;
  }
  return code;
}

}  // namespace videodna
