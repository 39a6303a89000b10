#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "lcop/kernels.hpp"
#include "lcop/math.hpp"
#include "lcop/rng.hpp"

// Element computations shared verbatim by the serial and OpenMP lanes, so
// both produce identical values and only the loop scheduling differs.
namespace lcop::kernels::detail {

inline constexpr double kProbFloor = 1e-300;  // keeps logs finite at extreme parameters

// P(y | s) for one observation given its linear predictor xb. Category y
// occupies (gamma_{J-y}, gamma_{J-y+1}] with gamma_0 = -inf, gamma_J = +inf;
// the array holds gamma_1..gamma_{J-1} zero-based.
inline double band_prob(int y, double xb, double sigma, const Eigen::VectorXd& gamma) {
  const int J = static_cast<int>(gamma.size()) + 1;
  double hi = (y == 1) ? 1.0 : math::norm_cdf_clamped((gamma[J - y] - xb) / sigma);
  double lo = (y == J) ? 0.0 : math::norm_cdf_clamped((gamma[J - y - 1] - xb) / sigma);
  double p = hi - lo;
  return p > 0.0 ? p : 0.0;
}

// Mixture probability of the observed category. Both class weights are
// computed directly (q1 = Phi(-eta), q2 = Phi(eta)) rather than deriving one
// as 1 - other: the direct form keeps relative accuracy in either tail and
// makes swapping the class labels an exact permutation of the two products,
// so the likelihood is bitwise invariant under relabeling.
inline double mix_prob(double q1, double q2, double p1, double p2) {
  double m = q1 * p1 + q2 * p2;
  return m > kProbFloor ? m : kProbFloor;
}

inline double tn_draw(rng::Philox& gen, double mean, double sd, double lo, double hi) {
  return gen.truncated_normal(mean, sd, lo, hi);
}

}  // namespace lcop::kernels::detail
