#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., "Parallel Random
// Numbers: As Easy As 1, 2, 3", SC'11). Pure integer arithmetic, so the raw
// stream is identical on every platform; random access by counter makes
// streams splittable without coordination. One counter word is reserved as a
// stream id so substreams derived from (seed, stream) are independent.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace oamcv {

struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr std::uint32_t kMult0 = 0xD2511F53u;
  static constexpr std::uint32_t kMult1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  /// One 128-bit block for the given counter and key (10 rounds).
  static Counter block(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t(kMult0) * ctr[0];
      const std::uint64_t p1 = std::uint64_t(kMult1) * ctr[2];
      ctr = {std::uint32_t(p1 >> 32) ^ ctr[1] ^ key[0], std::uint32_t(p1),
             std::uint32_t(p0 >> 32) ^ ctr[3] ^ key[1], std::uint32_t(p0)};
    }
    return ctr;
  }
};

namespace detail {

/// 53-bit uniform strictly inside (0, 1); safe as a log argument.
inline double unit_open_double(std::uint32_t lo, std::uint32_t hi) {
  const std::uint64_t bits = (std::uint64_t(hi) << 32) | lo;
  return (double(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace detail

/// Addressable stream of standard-normal pairs: sample i consumes exactly the
/// Philox block with counter (i, stream, 0), so any index can be generated in
/// any order with identical results. Distinct (seed, stream) pairs give
/// independent streams.
class NormalPairStream {
 public:
  NormalPairStream(std::uint64_t seed, std::uint32_t stream)
      : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)}, stream_(stream) {}

  std::pair<double, double> operator()(std::uint64_t index) const {
    const Philox4x32::Counter out = Philox4x32::block(
        {std::uint32_t(index), std::uint32_t(index >> 32), stream_, 0u}, key_);
    const double u1 = detail::unit_open_double(out[0], out[1]);
    const double u2 = detail::unit_open_double(out[2], out[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

 private:
  Philox4x32::Key key_;
  std::uint32_t stream_;
};

}  // namespace oamcv
