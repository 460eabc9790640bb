#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>

namespace hafcp {

/// 64-bit FNV-1a, used for artifact lineage. Not a security primitive.
class Fingerprint {
 public:
  Fingerprint& add(std::string_view bytes) noexcept {
    for (unsigned char c : bytes) {
      hash_ ^= c;
      hash_ *= 0x100000001B3ULL;
    }
    // field separator so ("ab","c") and ("a","bc") differ
    hash_ ^= 0xFF;
    hash_ *= 0x100000001B3ULL;
    return *this;
  }

  Fingerprint& add(std::uint64_t v) noexcept {
    char buf[8];
    std::memcpy(buf, &v, sizeof v);
    return add(std::string_view(buf, sizeof buf));
  }

  Fingerprint& add(double v) noexcept {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof v);
    return add(bits);
  }

  template <typename T>
  Fingerprint& add_all(std::span<const T> values) noexcept {
    for (const T& v : values) add(v);
    return *this;
  }

  std::uint64_t value() const noexcept { return hash_; }
  std::string hex() const;

 private:
  std::uint64_t hash_ = 0xCBF29CE484222325ULL;
};

inline std::string fingerprint_of(std::string_view bytes) { return Fingerprint{}.add(bytes).hex(); }

}  // namespace hafcp
