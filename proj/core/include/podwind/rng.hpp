#pragma once

#include <array>
#include <cstdint>

namespace podwind {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Any output
// is a pure function of (key, counter), so random phases can be addressed
// directly by (seed, realization, mode, line) without sequential state.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit Philox4x32(std::uint64_t seed) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  Counter operator()(Counter ctr) const noexcept;

 private:
  Key key_;
};

// Uniform double in [0, 1) from the top 53 bits of two 32-bit words.
double to_unit_interval(std::uint32_t hi, std::uint32_t lo) noexcept;

// Random phase theta in [0, 2 pi) for realization r, mode i, frequency line k.
double random_phase(std::uint64_t seed, std::uint64_t realization, std::uint32_t mode,
                    std::uint32_t line) noexcept;

// Derives an independent 64-bit seed from a base seed and a stream tag.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

}  // namespace podwind
