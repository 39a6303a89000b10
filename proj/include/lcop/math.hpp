#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <vector>

namespace lcop::math {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kLogTwoPi = 1.8378770664093454835606594728112353;
inline constexpr double kSqrtTwoPi = 2.5066282746310005024157652848110453;

// Standard normal CDF via the complementary error function; relative accuracy
// is that of erfc (a few ulp) across the full double range.
inline double norm_cdf(double t) { return 0.5 * std::erfc(-t / std::numbers::sqrt2_v<double>); }

inline double norm_pdf(double t) { return std::exp(-0.5 * t * t) / kSqrtTwoPi; }

inline double norm_log_pdf(double t) { return -0.5 * (t * t + kLogTwoPi); }

// Likelihood evaluations clamp the standardized argument so that every band
// probability stays strictly positive in double precision.
inline constexpr double kTailClamp = 8.0;

inline double norm_cdf_clamped(double t) {
  if (t > kTailClamp) t = kTailClamp;
  if (t < -kTailClamp) t = -kTailClamp;
  return norm_cdf(t);
}

// Inverse standard normal CDF: rational initial guess refined by two Halley
// steps against the erfc-based CDF, giving close to full double accuracy.
double norm_ppf(double p);

// log(Gamma density) with shape a and rate b at x > 0.
inline double gamma_log_pdf(double x, double a, double b) {
  return a * std::log(b) - std::lgamma(a) + (a - 1.0) * std::log(x) - b * x;
}

// log(Inverse-Gamma density) with shape a and scale b at x > 0.
inline double inv_gamma_log_pdf(double x, double a, double b) {
  return a * std::log(b) - std::lgamma(a) - (a + 1.0) * std::log(x) - b / x;
}

// log N(x; mean, cov) for SPD cov.
double mvn_log_pdf(const VectorXd& x, const VectorXd& mean, const MatrixXd& cov);

// log multivariate-t density with dof nu, location mu, scale matrix scale.
double mvt_log_pdf(const VectorXd& x, const VectorXd& mu, const MatrixXd& scale, double nu);

// log(sum(exp(v))) computed with a max shift.
double log_sum_exp(const std::vector<double>& v);

// log(mean(exp(v))) plus a batch-means standard error of the log of the mean.
// Used for Monte Carlo averages of densities held in log form.
struct LogMeanResult {
  double log_mean;
  double se_log_mean;  // delta-method batch-means error on log scale
};
LogMeanResult log_mean_exp_with_se(const std::vector<double>& v, int n_batches);

}  // namespace lcop::math
