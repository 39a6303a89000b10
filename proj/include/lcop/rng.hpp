#pragma once

#include <cstdint>

namespace lcop::rng {

// Philox4x32-10 counter-based generator. Streams with distinct (seed, stream)
// pairs are independent, draws are reproducible bit-for-bit regardless of how
// work is scheduled, and a fresh stream can be opened at O(1) cost. That makes
// per-observation draws safe to run concurrently: observation i at sweep t
// always reads the same substream no matter which thread executes it.
class Philox {
 public:
  Philox(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();

  // Uniform on (0, 1) with 53 random bits, never returning an endpoint.
  double uniform();

  // Standard normal by inversion (one uniform per draw).
  double normal();

  // Gamma(shape, rate 1). Rejection-based, consumes a variable number of
  // uniforms from this stream only.
  double gamma(double shape);

  // Inverse-Gamma(shape, scale).
  double inv_gamma(double shape, double scale);

  // Exponential(rate 1).
  double exponential();

  bool bernoulli(double p) { return uniform() < p; }

  // Normal(mean, sd^2) truncated to (lo, hi); either bound may be infinite.
  // Inverse-CDF in the central regime, exponential rejection in far tails.
  double truncated_normal(double mean, double sd, double lo, double hi);

 private:
  void refill();

  std::uint32_t key_[2];
  std::uint32_t counter_[4];
  std::uint32_t block_[4];
  int pos_;  // next unread 32-bit word in block_, 4 = exhausted
};

// Stable 64-bit mix used to derive auxiliary seeds (one per independent
// chain or reduced run) from a master seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag);

// Substream ids. Stream 0 is the chain's sequential stream; per-observation
// streams encode (purpose, sweep, observation) so that concurrent draws are
// deterministic. Sweep 0 is reserved for initialization.
enum class Purpose : std::uint64_t {
  kClassIndicator = 1,
  kLatentOutcome = 2,
  kLatentClass = 3,
  kLabelSwap = 4,
};

inline constexpr std::uint64_t kChainStream = 0;

inline std::uint64_t obs_stream(Purpose purpose, std::uint64_t sweep, std::uint64_t obs) {
  // 4 bits purpose | 32 bits sweep | 28 bits observation index.
  return (static_cast<std::uint64_t>(purpose) << 60) | (sweep << 28) | (obs + 1);
}

}  // namespace lcop::rng
