#include "lcop/rng.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "lcop/errors.hpp"
#include "lcop/math.hpp"

namespace lcop::rng {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void philox_round(std::uint32_t c[4], const std::uint32_t k[2]) {
  std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
  std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
  std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
  std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
  std::uint32_t out[4] = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  c[0] = out[0];
  c[1] = out[1];
  c[2] = out[2];
  c[3] = out[3];
}

}  // namespace

Philox::Philox(std::uint64_t seed, std::uint64_t stream) : pos_(4) {
  key_[0] = static_cast<std::uint32_t>(seed);
  key_[1] = static_cast<std::uint32_t>(seed >> 32);
  counter_[0] = 0;
  counter_[1] = 0;
  counter_[2] = static_cast<std::uint32_t>(stream);
  counter_[3] = static_cast<std::uint32_t>(stream >> 32);
}

void Philox::refill() {
  std::uint32_t c[4] = {counter_[0], counter_[1], counter_[2], counter_[3]};
  std::uint32_t k[2] = {key_[0], key_[1]};
  for (int r = 0; r < 10; ++r) {
    philox_round(c, k);
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  block_[0] = c[0];
  block_[1] = c[1];
  block_[2] = c[2];
  block_[3] = c[3];
  if (++counter_[0] == 0) ++counter_[1];  // 64-bit block index within the stream
  pos_ = 0;
}

std::uint64_t Philox::next_u64() {
  if (pos_ > 2) refill();
  std::uint64_t lo = block_[pos_];
  std::uint64_t hi = block_[pos_ + 1];
  pos_ += 2;
  return (hi << 32) | lo;
}

double Philox::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Philox::normal() { return math::norm_ppf(uniform()); }

double Philox::exponential() { return -std::log(uniform()); }

double Philox::gamma(double shape) {
  if (!(shape > 0.0)) throw DomainError("gamma: shape must be positive");
  if (shape < 1.0) {
    double g = gamma(shape + 1.0);
    return g * std::pow(uniform(), 1.0 / shape);
  }
  // Marsaglia-Tsang squeeze method.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (int it = 0; it < 10000; ++it) {
    double x = normal();
    double t = 1.0 + c * x;
    if (t <= 0.0) continue;
    double v = t * t * t;
    double u = uniform();
    double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
  throw NumericalError("gamma: rejection sampler failed to accept");
}

double Philox::inv_gamma(double shape, double scale) {
  if (!(scale > 0.0)) throw DomainError("inv_gamma: scale must be positive");
  return scale / gamma(shape);
}

double Philox::truncated_normal(double mean, double sd, double lo, double hi) {
  if (!(sd > 0.0)) throw DomainError("truncated_normal: sd must be positive");
  if (!(lo < hi)) throw ContractError("truncated_normal: need lo < hi");
  double a = (lo - mean) / sd;
  double b = (hi - mean) / sd;

  // Mirror a lower-tail region onto the upper tail.
  bool flipped = false;
  if (b < -5.0) {
    std::swap(a, b);
    a = -a;
    b = -b;
    flipped = true;
  }

  double z;
  if (a > 5.0) {
    // One-sided exponential rejection from the tail at a, thinned to z <= b.
    const double lambda = 0.5 * (a + std::sqrt(a * a + 4.0));
    int it = 0;
    for (;; ++it) {
      if (it > 100000) throw NumericalError("truncated_normal: tail sampler failed");
      z = a + exponential() / lambda;
      if (z > b) continue;
      double diff = z - lambda;
      if (uniform() <= std::exp(-0.5 * diff * diff)) break;
    }
  } else {
    double pa = math::norm_cdf(a);
    double pb = math::norm_cdf(b);
    double u = pa + uniform() * (pb - pa);
    u = std::fmin(std::fmax(u, std::numeric_limits<double>::min()),
                  1.0 - 0.5 * std::numeric_limits<double>::epsilon());
    z = math::norm_ppf(u);
  }
  if (flipped) z = -z;
  return mean + sd * z;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed + tag * 0x9E3779B97F4A7C15ULL + 0x9E3779B97F4A7C15ULL;
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

}  // namespace lcop::rng
