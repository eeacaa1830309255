#pragma once

// Deterministic random streams for simulation work.
//
// Streams are keyed: a base seed plus a short path of indices (method,
// sigma index, replicate, ...) is hashed into the generator state, so
// every replicate owns an independent stream.  Results are then
// byte-identical regardless of scheduling or thread count, and across
// platforms, which standard-library distributions do not guarantee.
// Generator is xoshiro256++ seeded through splitmix64; normals come
// from Box-Muller.

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace flsa {

constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Rng {
public:
  // Key = seed followed by stream path components.  Identical keys give
  // identical streams; any difference decorrelates the whole state.
  explicit Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> path = {}) noexcept {
    std::uint64_t mix = seed;
    for (std::uint64_t p : path) {
      mix = splitmix64(mix) ^ (p + 0x632be59bd9b4e019ULL);
    }
    for (auto& word : state_) {
      word = splitmix64(mix);
    }
  }

  std::uint64_t next_u64() noexcept {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_unit() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; caches the second variate.
  double next_gaussian() noexcept {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = next_unit();
    double u2 = next_unit();
    // 1 - u1 lies in (0, 1]: keeps the log argument away from zero.
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(angle);
    have_spare_ = true;
    return r * std::cos(angle);
  }

private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace flsa
