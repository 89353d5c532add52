#include "podwind/rng.hpp"

#include <numbers>

namespace podwind {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

Philox4x32::Counter Philox4x32::operator()(Counter ctr) const noexcept {
  Key key = key_;
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

double to_unit_interval(std::uint32_t hi, std::uint32_t lo) noexcept {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 21) ^ (lo >> 11);
  return static_cast<double>(bits & ((std::uint64_t{1} << 53) - 1)) * 0x1.0p-53;
}

double random_phase(std::uint64_t seed, std::uint64_t realization, std::uint32_t mode,
                    std::uint32_t line) noexcept {
  const Philox4x32 gen(seed);
  const auto out = gen({static_cast<std::uint32_t>(realization),
                        static_cast<std::uint32_t>(realization >> 32), mode, line});
  return 2.0 * std::numbers::pi * to_unit_interval(out[0], out[1]);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  const Philox4x32 gen(seed ^ 0x5851F42D4C957F2Dull);
  const auto out = gen({static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                        0xA5A5A5A5u, 0x3C3C3C3Cu});
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace podwind
