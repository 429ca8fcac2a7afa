#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace meanrev {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
///
/// Stream layout, fixed so other implementations reproduce it bit-exactly:
///  - key = (seed & 0xffffffff, seed >> 32)
///  - block i uses counter (i & 0xffffffff, i >> 32, 0, 0), i = 0, 1, 2, ...
///  - 32-bit words are consumed in order w0, w1, w2, w3 of each block
///  - uniform(): two consecutive words a, b give
///      ((uint64(a) << 32 | b) >> 11) * 2^-53 + 2^-54, which lies in (0, 1)
///  - gaussian(): Box-Muller on two consecutive uniforms u1, u2:
///      r = sqrt(-2 ln u1); z0 = r cos(2 pi u2), z1 = r sin(2 pi u2);
///    z0 is returned first, z1 on the next call.
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  explicit Philox4x32(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  /// Ten-round bijection of one counter block under a key.
  static Block encrypt(Block ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

  std::uint32_t next_u32() {
    if (pos_ == 4) {
      block_ = encrypt({static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32), 0u, 0u},
                       key_);
      ++counter_;
      pos_ = 0;
    }
    return block_[pos_++];
  }

  double uniform() {
    const std::uint64_t a = next_u32();
    const std::uint64_t b = next_u32();
    const std::uint64_t bits = ((a << 32) | b) >> 11;
    return static_cast<double>(bits) * 0x1.0p-53 + 0x1.0p-54;
  }

  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  /// Uniform integer in [0, bound) by rejection on 32-bit words.
  std::uint32_t below(std::uint32_t bound) {
    const std::uint32_t limit = bound == 0 ? 0 : (0xFFFFFFFFu - bound + 1) % bound;
    while (true) {
      const std::uint32_t x = next_u32();
      if (x >= limit) return x % bound;
    }
  }

 private:
  Key key_;
  std::uint64_t counter_ = 0;
  Block block_{};
  int pos_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace meanrev
