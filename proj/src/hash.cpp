#include "atf/hash.hpp"

namespace atf {

std::string to_hex(uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<size_t>(i)] = digits[value & 0xf];
    value >>= 4;
  }
  return out;
}

std::string fnv1a64_hex(std::string_view data) {
  return to_hex(fnv1a64(data));
}

}  // namespace atf
