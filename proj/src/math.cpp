#include "lcop/math.hpp"

#include <algorithm>
#include <limits>

#include "lcop/errors.hpp"

namespace lcop::math {

namespace {

// Rational approximation to the inverse normal CDF (relative error ~1e-9),
// used only as the starting point for Halley refinement.
double ppf_initial(double p) {
  static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                              -2.759285104469687e+02, 1.383577518672690e+02,
                              -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                              -1.556989798598866e+02, 6.680131188771972e+01,
                              -1.328068155288572e+01};
  static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                              -2.400758277161838e+00, -2.549732539343734e+00,
                              4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  if (p < p_low) {
    double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - p_low) {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double q = p - 0.5, r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double norm_ppf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("norm_ppf: p must lie in (0, 1)");
  double x = ppf_initial(p);
  for (int it = 0; it < 2; ++it) {
    double e = norm_cdf(x) - p;
    double u = e * kSqrtTwoPi * std::exp(0.5 * x * x);
    x = x - u / (1.0 + 0.5 * x * u);
  }
  return x;
}

double mvn_log_pdf(const VectorXd& x, const VectorXd& mean, const MatrixXd& cov) {
  Eigen::LLT<MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericalError("mvn_log_pdf: covariance not SPD");
  VectorXd r = x - mean;
  VectorXd half = llt.matrixL().solve(r);
  double log_det = 0.0;
  for (int i = 0; i < cov.rows(); ++i) log_det += std::log(llt.matrixL()(i, i));
  return -0.5 * x.size() * kLogTwoPi - log_det - 0.5 * half.squaredNorm();
}

double mvt_log_pdf(const VectorXd& x, const VectorXd& mu, const MatrixXd& scale, double nu) {
  const double p = static_cast<double>(x.size());
  Eigen::LLT<MatrixXd> llt(scale);
  if (llt.info() != Eigen::Success) throw NumericalError("mvt_log_pdf: scale not SPD");
  VectorXd half = llt.matrixL().solve(x - mu);
  double log_det = 0.0;
  for (int i = 0; i < scale.rows(); ++i) log_det += std::log(llt.matrixL()(i, i));
  double quad = half.squaredNorm();
  return std::lgamma(0.5 * (nu + p)) - std::lgamma(0.5 * nu) - 0.5 * p * std::log(nu * M_PI) -
         log_det - 0.5 * (nu + p) * std::log1p(quad / nu);
}

double log_sum_exp(const std::vector<double>& v) {
  if (v.empty()) throw ContractError("log_sum_exp: empty input");
  double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double t : v) s += std::exp(t - m);
  return m + std::log(s);
}

LogMeanResult log_mean_exp_with_se(const std::vector<double>& v, int n_batches) {
  const int n = static_cast<int>(v.size());
  if (n_batches < 2 || n < n_batches)
    throw ContractError("log_mean_exp_with_se: need at least n_batches entries");
  double m = *std::max_element(v.begin(), v.end());
  // Work with shifted linear-scale values exp(v - m) to avoid overflow.
  double total = 0.0;
  for (double t : v) total += std::exp(t - m);
  double mean_shifted = total / n;

  // Batch means on the shifted linear scale; delta method for the log.
  const int batch = n / n_batches;
  const int used = batch * n_batches;
  std::vector<double> bm(n_batches, 0.0);
  for (int k = 0; k < n_batches; ++k) {
    double s = 0.0;
    for (int i = k * batch; i < (k + 1) * batch; ++i) s += std::exp(v[i] - m);
    bm[k] = s / batch;
  }
  double mb = 0.0;
  for (double t : bm) mb += t;
  mb /= n_batches;
  double var_b = 0.0;
  for (double t : bm) var_b += (t - mb) * (t - mb);
  var_b /= (n_batches - 1);
  double se_mean = std::sqrt(var_b / n_batches) * (static_cast<double>(used) / n);
  double se_log = mean_shifted > 0.0 ? se_mean / mean_shifted : std::numeric_limits<double>::infinity();
  return {m + std::log(mean_shifted), se_log};
}

}  // namespace lcop::math
