#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace shrinkreg::rng {

// splitmix64 finalizer. Stateless 64-bit mix used for substream key
// derivation; the exact function is part of the reproducibility contract.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ull;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebull;
  z ^= z >> 31;
  return z;
}

// Stream domains keep the per-replication draws, the design draw, and the
// harness-internal streams from ever overlapping.
enum class StreamDomain : std::uint64_t {
  kDesign = 1,
  kReplication = 2,
  kHoldout = 3,
  kDecomposition = 4,
  kInvariance = 5,
};

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

// Substream key for (seed, domain, index). Parallel and serial generation
// agree bit-exactly because every substream is a pure function of these
// three values.
constexpr std::uint64_t substream_key(std::uint64_t seed, StreamDomain domain,
                                      std::uint64_t index) {
  std::uint64_t h = mix64(seed + kGolden * static_cast<std::uint64_t>(domain));
  return mix64(h ^ (index + kGolden));
}

// xoshiro256++ (Blackman & Vigna), seeded through a splitmix64 chain.
class Xoshiro256pp {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256pp(std::uint64_t key) {
    std::uint64_t s = key;
    for (auto& word : state_) {
      s += kGolden;
      word = mix64(s);
    }
  }

  std::uint64_t operator()() {
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

  static constexpr std::uint64_t min() { return 0; }
  static constexpr std::uint64_t max() { return std::numeric_limits<std::uint64_t>::max(); }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::array<std::uint64_t, 4> state_{};
};

// One substream: uniforms and standard normals. Normal deviates come from
// the Marsaglia polar method so the sequence does not depend on any
// standard-library distribution implementation.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t key) : engine_(key) {}

  NormalStream(std::uint64_t seed, StreamDomain domain, std::uint64_t index)
      : engine_(substream_key(seed, domain, index)) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

 private:
  Xoshiro256pp engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace shrinkreg::rng
