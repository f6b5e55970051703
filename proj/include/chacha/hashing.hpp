#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace chacha {

/// Incremental 64-bit FNV-1a. Feeding "a", then "b" gives the same state as
/// feeding "ab", which lets interaction features extend a cached prefix.
class Fnv1a64 {
 public:
  static constexpr std::uint64_t kOffsetBasis = 0xcbf29ce484222325ULL;
  static constexpr std::uint64_t kPrime = 0x100000001b3ULL;

  constexpr Fnv1a64() = default;

  constexpr Fnv1a64& update(std::string_view bytes) {
    for (char ch : bytes) {
      state_ ^= static_cast<unsigned char>(ch);
      state_ *= kPrime;
    }
    return *this;
  }

  constexpr std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = kOffsetBasis;
};

inline constexpr std::uint64_t fnv1a64(std::string_view bytes) {
  return Fnv1a64{}.update(bytes).digest();
}

/// Separator placed between hashed parts (ASCII unit separator).
inline constexpr std::string_view kPartSeparator{"\x1f", 1};

inline constexpr std::uint64_t mask_bits(std::uint64_t hash, int bit_precision) {
  return bit_precision >= 64 ? hash : hash & ((std::uint64_t{1} << bit_precision) - 1);
}

/// Hash of the parts joined with kPartSeparator, masked to bit_precision bits.
inline std::uint64_t hash_index(std::span<const std::string_view> parts, int bit_precision) {
  Fnv1a64 h;
  bool first = true;
  for (std::string_view p : parts) {
    if (!first) h.update(kPartSeparator);
    h.update(p);
    first = false;
  }
  return mask_bits(h.digest(), bit_precision);
}

}  // namespace chacha
