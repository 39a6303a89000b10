#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "lcop/exec.hpp"

namespace lcop::model {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;

// Two latent classes throughout. Class s = 2 when the class-membership
// utility is positive, s = 1 otherwise.
inline constexpr int kNumClasses = 2;

// Observed data. Categories are coded 1..J with category 1 occupying the TOP
// utility band: for J = 3 with cut-points (0, 1), y = 1 means z > 1, y = 2
// means 0 < z <= 1, and y = 3 means z <= 0. In general category j covers
// (gamma_{J-j}, gamma_{J-j+1}] with gamma_0 = -inf and gamma_J = +inf.
struct Dataset {
  VectorXi y;   // n, values in 1..J
  MatrixXd X;   // n x q outcome covariates, first column constant 1
  MatrixXd W;   // n x p class-membership covariates, first column constant 1
  int J = 3;

  int n() const { return static_cast<int>(y.size()); }
  int q() const { return static_cast<int>(X.cols()); }
  int p() const { return static_cast<int>(W.cols()); }

  // Throws ValidationError on hard violations (shape mismatch, bad category
  // codes, missing intercept column, rank deficiency); returns warnings for
  // soft ones (a category in 1..J that never occurs).
  std::vector<std::string> validate() const;
};

// Per-class cut-points with both ends fixed: gamma_1 = 0, gamma_{J-1} = 1.
// The J-3 interior points are carried in an unconstrained parameterization
// delta; see cutpoints_from_delta.
struct Cutpoints {
  std::array<VectorXd, 2> gamma;  // each length J-1, strictly increasing
  std::array<VectorXd, 2> delta;  // each length J-3, unconstrained

  static Cutpoints fixed_default(int J);
  static Cutpoints from_delta(int J, const std::array<VectorXd, 2>& delta);
  static Cutpoints from_gamma(const std::array<VectorXd, 2>& gamma);

  int n_categories() const { return static_cast<int>(gamma[0].size()) + 1; }
};

// Unconstrained-to-constrained map for one class's interior cut-points.
// Each delta component gives, through a logistic link, the fraction of the
// remaining (gamma_{j-1}, 1) interval consumed by gamma_j, so any finite
// delta yields strictly increasing cut-points with the ends pinned at 0 and 1.
VectorXd cutpoints_from_delta(int J, const VectorXd& delta);
VectorXd delta_from_cutpoints(const VectorXd& gamma);

struct ParamDraw {
  VectorXd alpha;
  std::array<VectorXd, 2> beta;
  std::array<double, 2> sigma2;
  Cutpoints cutpoints;
};

// Full latent state carried across sweeps. l is used only by the
// non-collapsed sampler and may be empty otherwise.
struct ChainState {
  ParamDraw params;
  VectorXd z;  // latent outcome utilities, z_i in the band of y_i
  VectorXi u;  // class indicators, values 1 or 2
  VectorXd l;  // latent class utilities, sign consistent with u
};

struct PriorSpec {
  VectorXd alpha0;
  MatrixXd A0;
  std::array<VectorXd, 2> beta0;
  std::array<MatrixXd, 2> B0;
  double v = 8.6;  // sigma2_s ~ Inverse-Gamma(v/2, d/2)
  double d = 2.6;
  std::array<VectorXd, 2> delta0;  // only used when J > 3
  std::array<MatrixXd, 2> D0;

  static PriorSpec defaults(int p, int q, int J = 3);
  void validate(int p, int q, int J) const;
};

// Half-open utility band (lower, upper] for category y; infinite ends for the
// extreme categories.
std::pair<double, double> band_bounds(int y, const VectorXd& gamma);

// P(s_i = 2 | w_i, alpha) = Phi(w_i' alpha).
double class_prob(const VectorXd& w, const VectorXd& alpha);

// J-vector of P(y = j | s) for one observation and one class.
VectorXd ordinal_class_cond_probs(const VectorXd& x, const VectorXd& beta_s, double sigma2_s,
                                  const VectorXd& gamma_s);

// Same, but from an already-formed linear predictor x' beta_s.
VectorXd ordinal_probs_at(double xb, double sigma2_s, const VectorXd& gamma_s);

// J-vector of P(y = j) = sum_s P(y = j | s) P(s), mixing over the two classes.
VectorXd mixture_outcome_probs(const VectorXd& x, const VectorXd& w, const ParamDraw& theta);

// Sum over observations of log P(y_i) at theta.
double log_likelihood(const Dataset& data, const ParamDraw& theta, Exec exec = Exec::serial);

// Log of the marginal-of-u target for the class-membership coefficients:
// sum_i log{(1 - Phi(w_i'alpha)) P(y_i|1) + Phi(w_i'alpha) P(y_i|2)}
// plus the Normal(alpha0, A0) log prior (constants included).
double log_posterior_kernel_alpha(const VectorXd& alpha, const std::array<VectorXd, 2>& beta,
                                  const std::array<double, 2>& sigma2, const Cutpoints& cutpoints,
                                  const Dataset& data, const PriorSpec& prior,
                                  Exec exec = Exec::serial);

}  // namespace lcop::model
