#pragma once

#include <cmath>
#include <cstdint>

#include "varseq/specfun.hpp"

// Counter-based random number generation (Philox 4x32-10). Streams are
// addressed by (seed, stream id); any (replication, block) pair maps to its
// own stream, so simulation output is identical regardless of how
// replications are scheduled across workers.

namespace varseq {

namespace detail {

inline constexpr std::uint32_t kPhiloxW32A = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW32B = 0xBB67AE85u;
inline constexpr std::uint32_t kPhiloxM4x32A = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM4x32B = 0xCD9E8D57u;

inline void philox_round(std::uint32_t ctr[4], const std::uint32_t key[2]) {
  const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM4x32A) * ctr[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM4x32B) * ctr[2];
  const std::uint32_t lo0 = static_cast<std::uint32_t>(p0), hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const std::uint32_t lo1 = static_cast<std::uint32_t>(p1), hi1 = static_cast<std::uint32_t>(p1 >> 32);
  std::uint32_t out0 = hi1 ^ ctr[1] ^ key[0];
  std::uint32_t out1 = lo1;
  std::uint32_t out2 = hi0 ^ ctr[3] ^ key[1];
  std::uint32_t out3 = lo0;
  ctr[0] = out0;
  ctr[1] = out1;
  ctr[2] = out2;
  ctr[3] = out3;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace detail

// One independent Philox stream: 2^64 64-bit draws addressed by a counter.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  std::uint64_t next_u64() {
    if (cache_full_) {
      cache_full_ = false;
      return cache_;
    }
    std::uint32_t ctr[4] = {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                            static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
    std::uint32_t key[2] = {key_[0], key_[1]};
    for (int round = 0; round < 10; ++round) {
      detail::philox_round(ctr, key);
      if (round < 9) {
        key[0] += detail::kPhiloxW32A;
        key[1] += detail::kPhiloxW32B;
      }
    }
    ++block_;
    cache_ = (static_cast<std::uint64_t>(ctr[2]) << 32) | ctr[3];
    cache_full_ = true;
    return (static_cast<std::uint64_t>(ctr[0]) << 32) | ctr[1];
  }

  // Uniform on (0, 1), never exactly 0 or 1.
  double uniform() {
    return (next_u64() >> 11) * 0x1.0p-53 + 0x1.0p-54;
  }

  // Standard normal via Box-Muller; consumes two uniforms per pair.
  double normal() {
    if (have_normal_) {
      have_normal_ = false;
      return spare_normal_;
    }
    double u1 = uniform(), u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * kPi * u2;
    spare_normal_ = r * std::sin(a);
    have_normal_ = true;
    return r * std::cos(a);
  }

  double cauchy(double scale) { return scale * std::tan(kPi * (uniform() - 0.5)); }

  double laplace(double scale) {
    double u = uniform() - 0.5;
    return (u < 0.0 ? scale : -scale) * std::log1p(-2.0 * std::fabs(u));
  }

  // Marsaglia-Tsang; boosts shape < 1 through the Gamma(a+1) identity.
  double gamma(double shape) {
    if (shape < 1.0) {
      double u = uniform();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double t = 1.0 + c * x;
      if (t <= 0.0) continue;
      double v = t * t * t;
      double u = uniform();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
  }

 private:
  std::uint32_t key_[2];
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::uint64_t cache_ = 0;
  bool cache_full_ = false;
  double spare_normal_ = 0.0;
  bool have_normal_ = false;
};

// Stream ids: pack (sample size, replication, block tag) so that the Y
// block draws identical noise for every signal level t at fixed (seed, n,
// replication), and cells at different n stay independent.
enum class StreamTag : std::uint64_t {
  kYBlock = 1,
  kZBlock = 2,
  kMeans = 3,
  kHyper = 4,
  kProposals = 5,
};

inline std::uint64_t make_stream(std::uint64_t n, std::uint64_t replication, StreamTag tag) {
  return (n << 40) ^ (replication << 8) ^ static_cast<std::uint64_t>(tag);
}

inline CounterRng make_rng(std::uint64_t seed, std::uint64_t n, std::uint64_t replication, StreamTag tag) {
  return CounterRng(seed, make_stream(n, replication, tag));
}

}  // namespace varseq
