#include "lcop/model.hpp"

#include <cmath>
#include <limits>

#include "lcop/errors.hpp"
#include "lcop/kernels.hpp"
#include "lcop/math.hpp"

namespace lcop::model {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw ValidationError(msg);
}

bool first_column_is_ones(const MatrixXd& m) {
  for (int i = 0; i < m.rows(); ++i)
    if (m(i, 0) != 1.0) return false;
  return true;
}

int matrix_rank(const MatrixXd& m) {
  Eigen::ColPivHouseholderQR<MatrixXd> qr(m);
  return static_cast<int>(qr.rank());
}

}  // namespace

std::vector<std::string> Dataset::validate() const {
  require(J >= 3, "Dataset: J must be at least 3");
  require(n() >= 1, "Dataset: need at least one observation");
  require(X.rows() == n() && W.rows() == n(), "Dataset: X, W, y row counts differ");
  require(q() >= 1 && p() >= 1, "Dataset: X and W need at least the intercept column");
  require(X.allFinite() && W.allFinite(), "Dataset: covariates must be finite");
  require(first_column_is_ones(X), "Dataset: first column of X must be constant 1");
  require(first_column_is_ones(W), "Dataset: first column of W must be constant 1");
  for (int i = 0; i < n(); ++i)
    require(y[i] >= 1 && y[i] <= J, "Dataset: y values must lie in 1..J");
  require(matrix_rank(X) == q(), "Dataset: X is rank deficient");
  require(matrix_rank(W) == p(), "Dataset: W is rank deficient");

  std::vector<std::string> warnings;
  std::vector<int> counts(J + 1, 0);
  for (int i = 0; i < n(); ++i) ++counts[y[i]];
  for (int j = 1; j <= J; ++j)
    if (counts[j] == 0)
      warnings.push_back("category " + std::to_string(j) + " does not occur in the data");
  return warnings;
}

VectorXd cutpoints_from_delta(int J, const VectorXd& delta) {
  if (J < 3) throw ContractError("cutpoints_from_delta: J must be at least 3");
  if (delta.size() != J - 3)
    throw ContractError("cutpoints_from_delta: delta must have length J-3");
  if (!delta.allFinite()) throw DomainError("cutpoints_from_delta: delta must be finite");
  VectorXd gamma(J - 1);
  gamma[0] = 0.0;
  for (int k = 0; k < delta.size(); ++k) {
    // gamma_{k+2} consumes a logistic fraction of the remaining (gamma, 1) gap.
    double frac = 1.0 / (1.0 + std::exp(-delta[k]));
    gamma[k + 1] = gamma[k] + (1.0 - gamma[k]) * frac;
  }
  gamma[J - 2] = 1.0;
  for (int k = 0; k + 1 < J - 1; ++k)
    if (!(gamma[k] < gamma[k + 1]))
      throw NumericalError("cutpoints_from_delta: increments underflowed");
  return gamma;
}

VectorXd delta_from_cutpoints(const VectorXd& gamma) {
  const int J = static_cast<int>(gamma.size()) + 1;
  if (J < 3) throw ContractError("delta_from_cutpoints: need at least two cut-points");
  if (gamma[0] != 0.0 || gamma[J - 2] != 1.0)
    throw DomainError("delta_from_cutpoints: ends must be fixed at 0 and 1");
  for (int k = 0; k + 1 < J - 1; ++k)
    if (!(gamma[k] < gamma[k + 1]))
      throw DomainError("delta_from_cutpoints: cut-points must be strictly increasing");
  VectorXd delta(J - 3);
  for (int k = 0; k < delta.size(); ++k) {
    double frac = (gamma[k + 1] - gamma[k]) / (1.0 - gamma[k]);
    delta[k] = std::log(frac) - std::log1p(-frac);
  }
  return delta;
}

Cutpoints Cutpoints::fixed_default(int J) {
  std::array<VectorXd, 2> delta;
  delta[0] = VectorXd::Zero(J - 3);
  delta[1] = VectorXd::Zero(J - 3);
  return from_delta(J, delta);
}

Cutpoints Cutpoints::from_delta(int J, const std::array<VectorXd, 2>& delta) {
  Cutpoints c;
  for (int s = 0; s < 2; ++s) {
    c.gamma[s] = cutpoints_from_delta(J, delta[s]);
    c.delta[s] = delta[s];
  }
  return c;
}

Cutpoints Cutpoints::from_gamma(const std::array<VectorXd, 2>& gamma) {
  Cutpoints c;
  for (int s = 0; s < 2; ++s) {
    c.delta[s] = delta_from_cutpoints(gamma[s]);
    c.gamma[s] = gamma[s];
  }
  return c;
}

PriorSpec PriorSpec::defaults(int p, int q, int J) {
  PriorSpec prior;
  prior.alpha0 = VectorXd::Zero(p);
  prior.A0 = 3.0 * MatrixXd::Identity(p, p);
  for (int s = 0; s < 2; ++s) {
    prior.beta0[s] = VectorXd::Zero(q);
    prior.B0[s] = MatrixXd::Identity(q, q);
    prior.delta0[s] = VectorXd::Zero(J - 3);
    prior.D0[s] = MatrixXd::Identity(J - 3, J - 3);
  }
  return prior;
}

void PriorSpec::validate(int p, int q, int J) const {
  require(alpha0.size() == p, "PriorSpec: alpha0 has wrong length");
  require(A0.rows() == p && A0.cols() == p, "PriorSpec: A0 has wrong shape");
  require(v > 0.0 && d > 0.0, "PriorSpec: v and d must be positive");
  for (int s = 0; s < 2; ++s) {
    require(beta0[s].size() == q, "PriorSpec: beta0 has wrong length");
    require(B0[s].rows() == q && B0[s].cols() == q, "PriorSpec: B0 has wrong shape");
    if (J > 3) {
      require(delta0[s].size() == J - 3, "PriorSpec: delta0 has wrong length");
      require(D0[s].rows() == J - 3 && D0[s].cols() == J - 3, "PriorSpec: D0 has wrong shape");
    }
  }
  auto check_spd = [](const MatrixXd& m, const char* name) {
    Eigen::LLT<MatrixXd> llt(m);
    if (llt.info() != Eigen::Success)
      throw ValidationError(std::string("PriorSpec: ") + name + " is not SPD");
  };
  check_spd(A0, "A0");
  check_spd(B0[0], "B0[1]");
  check_spd(B0[1], "B0[2]");
  if (J > 3) {
    check_spd(D0[0], "D0[1]");
    check_spd(D0[1], "D0[2]");
  }
}

std::pair<double, double> band_bounds(int y, const VectorXd& gamma) {
  const int J = static_cast<int>(gamma.size()) + 1;
  if (y < 1 || y > J) throw ContractError("band_bounds: category out of range");
  const double inf = std::numeric_limits<double>::infinity();
  double lo = (y == J) ? -inf : gamma[J - y - 1];
  double hi = (y == 1) ? inf : gamma[J - y];
  return {lo, hi};
}

double class_prob(const VectorXd& w, const VectorXd& alpha) {
  if (w.size() != alpha.size()) throw ContractError("class_prob: dimension mismatch");
  return math::norm_cdf_clamped(w.dot(alpha));
}

VectorXd ordinal_class_cond_probs(const VectorXd& x, const VectorXd& beta_s, double sigma2_s,
                                  const VectorXd& gamma_s) {
  if (x.size() != beta_s.size()) throw ContractError("ordinal_class_cond_probs: dimension mismatch");
  return ordinal_probs_at(x.dot(beta_s), sigma2_s, gamma_s);
}

VectorXd ordinal_probs_at(double xb, double sigma2_s, const VectorXd& gamma_s) {
  if (!(sigma2_s > 0.0)) throw DomainError("ordinal_probs_at: sigma2 must be positive");
  const int J = static_cast<int>(gamma_s.size()) + 1;
  const double sd = std::sqrt(sigma2_s);
  // CDF at each cut-point, ascending in z; successive differences telescope,
  // so the J components sum to 1 up to rounding.
  VectorXd cdf(J - 1);
  for (int k = 0; k < J - 1; ++k) cdf[k] = math::norm_cdf_clamped((gamma_s[k] - xb) / sd);
  VectorXd probs(J);
  probs[J - 1] = cdf[0];
  for (int k = 1; k < J - 1; ++k) probs[J - 1 - k] = std::max(0.0, cdf[k] - cdf[k - 1]);
  probs[0] = 1.0 - cdf[J - 2];
  return probs;
}

VectorXd mixture_outcome_probs(const VectorXd& x, const VectorXd& w, const ParamDraw& theta) {
  VectorXd p1 = ordinal_class_cond_probs(x, theta.beta[0], theta.sigma2[0], theta.cutpoints.gamma[0]);
  VectorXd p2 = ordinal_class_cond_probs(x, theta.beta[1], theta.sigma2[1], theta.cutpoints.gamma[1]);
  double q2 = class_prob(w, theta.alpha);
  return (1.0 - q2) * p1 + q2 * p2;
}

double log_likelihood(const Dataset& data, const ParamDraw& theta, Exec exec) {
  if (theta.alpha.size() != data.p() || theta.beta[0].size() != data.q() ||
      theta.beta[1].size() != data.q())
    throw ContractError("log_likelihood: parameter dimensions do not match the data");
  if (!(theta.sigma2[0] > 0.0 && theta.sigma2[1] > 0.0))
    throw DomainError("log_likelihood: sigma2 must be positive");
  if (theta.cutpoints.n_categories() != data.J)
    throw ContractError("log_likelihood: cut-points do not match J");
  VectorXd terms(data.n());
  kernels::mixture_loglik_terms(exec, data, theta, terms.data());
  double sum = 0.0;
  for (int i = 0; i < data.n(); ++i) sum += terms[i];
  return sum;
}

double log_posterior_kernel_alpha(const VectorXd& alpha, const std::array<VectorXd, 2>& beta,
                                  const std::array<double, 2>& sigma2, const Cutpoints& cutpoints,
                                  const Dataset& data, const PriorSpec& prior, Exec exec) {
  VectorXd p1(data.n()), p2(data.n());
  kernels::class_cond_table(exec, data, beta, sigma2, cutpoints, p1.data(), p2.data());
  VectorXd log_mix(data.n());
  kernels::alpha_mix_terms(exec, data, alpha, p1.data(), p2.data(), log_mix.data(), nullptr);
  double sum = 0.0;
  for (int i = 0; i < data.n(); ++i) sum += log_mix[i];
  return sum + math::mvn_log_pdf(alpha, prior.alpha0, prior.A0);
}

}  // namespace lcop::model
