#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace vecchia {

namespace detail {

// Philox 4x32-10 counter block cipher. Counter-based generation keeps every
// draw addressable by (seed, stream, index), so results are identical under
// any parallel schedule.
inline std::array<std::uint32_t, 4> philox4x32(std::uint64_t key,
                                               std::array<std::uint32_t, 4> ctr) {
  std::uint32_t k0 = static_cast<std::uint32_t>(key);
  std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
  constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
  constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    std::uint64_t p0 = static_cast<std::uint64_t>(M0) * ctr[0];
    std::uint64_t p1 = static_cast<std::uint64_t>(M1) * ctr[2];
    std::array<std::uint32_t, 4> next;
    next[0] = static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ k0;
    next[1] = static_cast<std::uint32_t>(p1);
    next[2] = static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ k1;
    next[3] = static_cast<std::uint32_t>(p0);
    ctr = next;
    k0 += W0;
    k1 += W1;
  }
  return ctr;
}

}  // namespace detail

/// Deterministic stream of uniforms/normals addressed by index.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(seed), stream_(stream) {}

  /// Uniform draw in (0,1), 53-bit resolution.
  double uniform(std::uint64_t i) const {
    auto b = block(i);
    std::uint64_t hi = (static_cast<std::uint64_t>(b[0]) << 32) | b[1];
    // top 53 bits, offset by half an ulp so 0 is never returned
    return (static_cast<double>(hi >> 11) + 0.5) * 0x1p-53;
  }

  /// Standard normal draw via Box-Muller on lanes of one counter block.
  double normal(std::uint64_t i) const {
    auto b = block(i);
    std::uint64_t hi = (static_cast<std::uint64_t>(b[0]) << 32) | b[1];
    std::uint64_t lo = (static_cast<std::uint64_t>(b[2]) << 32) | b[3];
    double u1 = (static_cast<double>(hi >> 11) + 0.5) * 0x1p-53;
    double u2 = (static_cast<double>(lo >> 11) + 0.5) * 0x1p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  double next_uniform() { return uniform(cursor_++); }
  double next_normal() { return normal(cursor_++); }

 private:
  std::array<std::uint32_t, 4> block(std::uint64_t i) const {
    return detail::philox4x32(key_, {static_cast<std::uint32_t>(i),
                                     static_cast<std::uint32_t>(i >> 32),
                                     static_cast<std::uint32_t>(stream_),
                                     static_cast<std::uint32_t>(stream_ >> 32)});
  }

  std::uint64_t key_;
  std::uint64_t stream_;
  std::uint64_t cursor_ = 0;
};

/// Stable derived seed for grid cells / replicates.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
  auto blk = detail::philox4x32(master, {static_cast<std::uint32_t>(a),
                                         static_cast<std::uint32_t>(a >> 32),
                                         static_cast<std::uint32_t>(b),
                                         static_cast<std::uint32_t>(b >> 32)});
  return (static_cast<std::uint64_t>(blk[0]) << 32) | blk[1];
}

}  // namespace vecchia
