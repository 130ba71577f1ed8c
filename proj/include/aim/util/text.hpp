#ifndef AIM_UTIL_TEXT_HPP
#define AIM_UTIL_TEXT_HPP

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>

namespace aim::util {

/// Shortest decimal text that parses back to exactly the same double.
inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// FNV-1a over raw bytes; used for deterministic content fingerprints.
class Fnv1a {
 public:
  void update(std::string_view bytes) {
    for (unsigned char c : bytes) {
      hash_ ^= c;
      hash_ *= 0x100000001b3ull;
    }
  }
  void update(double v) {
    char buf[sizeof(double)];
    __builtin_memcpy(buf, &v, sizeof(double));
    update(std::string_view(buf, sizeof(double)));
  }
  std::uint64_t digest() const { return hash_; }

  std::string hex() const;

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ull;
};

inline std::string Fnv1a::hex() const {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  std::uint64_t h = hash_;
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

}  // namespace aim::util

#endif  // AIM_UTIL_TEXT_HPP
