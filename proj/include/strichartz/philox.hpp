#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Every draw is
// a pure function of (key, counter), so any element of a stream can be
// produced independently of evaluation order or thread schedule.

#include <array>
#include <cmath>
#include <cstdint>
#include <utility>

#include "strichartz/vec2.hpp"

namespace strichartz::rng {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

inline Counter philox4x32_10(Counter ctr, Key key) noexcept {
  constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
  constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += W0;
      key[1] += W1;
    }
    const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

/// Named streams so that different consumers of one seed never share draws.
enum class Stream : std::uint32_t {
  walk = 1,
  signs = 2,
  weights = 3,
  field = 4,
  coefficients = 5,
};

/// A keyed generator; draw(index, block) is reproducible by construction.
class CounterRng {
public:
  CounterRng(std::uint64_t seed, Stream stream) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(static_cast<std::uint32_t>(stream)) {}

  Counter raw(std::int64_t index, std::uint32_t block = 0) const noexcept {
    const auto u = static_cast<std::uint64_t>(index);
    return philox4x32_10(
        {static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(u >> 32), block, stream_}, key_);
  }

  /// Two uniforms in (0, 1), 53 bits each.
  std::pair<double, double> uniform2(std::int64_t index, std::uint32_t block = 0) const noexcept {
    const Counter c = raw(index, block);
    return {to_open_unit(c[0], c[1]), to_open_unit(c[2], c[3])};
  }

  /// Two independent standard normals (Box-Muller).
  Vec2 normal2(std::int64_t index, std::uint32_t block = 0) const noexcept {
    const auto [u1, u2] = uniform2(index, block);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = 2.0 * kPi * u2;
    return {r * std::cos(th), r * std::sin(th)};
  }

  /// A fair +-1 sign.
  double sign(std::int64_t index, std::uint32_t block = 0) const noexcept {
    return (raw(index, block)[0] & 1u) ? 1.0 : -1.0;
  }

private:
  static double to_open_unit(std::uint32_t lo, std::uint32_t hi) noexcept {
    const std::uint64_t w = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return (static_cast<double>(w >> 11) + 0.5) * 0x1.0p-53;
  }

  Key key_;
  std::uint32_t stream_;
};

}  // namespace strichartz::rng
