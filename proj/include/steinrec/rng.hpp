#ifndef STEINREC_RNG_HPP
#define STEINREC_RNG_HPP

#include <cmath>
#include <cstdint>

namespace steinrec {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Deterministic, splittable generator (xoshiro256++ core seeded through
// splitmix64). A stream is addressed by (seed, stream, index); estimators
// give every sample its own index so the draws are identical whether the
// samples are visited serially or from a thread pool.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : RngStream(seed, 0, 0) {}

  RngStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    std::uint64_t z = seed;
    (void)splitmix64_next(z);
    z ^= 0xd1342543de82ef95ull * (stream + 1);
    (void)splitmix64_next(z);
    z ^= 0xaf251af3b0f025b5ull * (index + 1);
    for (auto& s : state_) s = splitmix64_next(z);
  }

  std::uint64_t next_u64() {
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

  // Uniform draw in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Marsaglia polar; the spare value is cached so a
  // stream consumes a deterministic amount of entropy per pair.
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
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4] = {};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Stream tags. Estimators drawing from distinct tags see independent sample
// sets even under a shared experiment seed; estimators sharing a tag see the
// identical sample stream.
namespace rng_stream {
inline constexpr std::uint64_t kMomentInputs = 1;
inline constexpr std::uint64_t kDerivativeInputs = 2;
inline constexpr std::uint64_t kLabels = 3;
inline constexpr std::uint64_t kScoreNoise = 4;
inline constexpr std::uint64_t kWeights = 5;
inline constexpr std::uint64_t kMixingMatrix = 6;
inline constexpr std::uint64_t kEvalData = 7;
}  // namespace rng_stream

}  // namespace steinrec

#endif
