#pragma once

// Reference implementations used only by the tests. Everything here is kept
// deliberately independent of the library code paths it checks: long double
// arithmetic, direct quadrature, textbook formulas, and the standard library
// RNG rather than the project's counter-based one.

#include <Eigen/Dense>

#include <array>
#include <cstdint>

namespace oracle {

// Standard normal CDF/PDF in long double via erfcl.
long double norm_cdf_ref(long double x);
long double norm_pdf_ref(long double x);

// CDF by Simpson integration of the density from 0 to x (slow, very accurate
// for |x| <= 12); cross-checks the erfcl route itself.
double simpson_norm_cdf(double x, int panels = 200000);

// Forward stick-breaking recursion for interior cut-points, long double.
Eigen::VectorXd cutpoints_ref(int J, const Eigen::VectorXd& delta);

struct TruncMoments {
  double mean = 0.0;
  double var = 0.0;
};
// Closed-form moments of a normal truncated to (lo, hi); infinite ends allowed.
TruncMoments truncated_normal_moments(double mu, double sigma, double lo, double hi);

// AR(1) series x_t = rho x_{t-1} + e_t with unit-variance marginals,
// innovations from std::mt19937_64.
Eigen::VectorXd ar1_series(int n, double rho, std::uint64_t seed);

// Independent standard normal draws from std::mt19937_64.
Eigen::VectorXd normal_series(int n, std::uint64_t seed);

// Intercept-only three-category model: one class-membership probability
// Phi(alpha), class-conditional category probabilities from cut-points (0, 1),
// so the category counts are sufficient for the likelihood.
struct TinyModel {
  std::array<int, 3> counts = {0, 0, 0};
  // Priors: alpha ~ N(0, alpha_var), beta_s ~ N(0, beta_var),
  // sigma2_s ~ inverse-gamma(shape, scale).
  double alpha_var = 3.0;
  double beta_var = 1.0;
  double sig_shape = 4.3;
  double sig_scale = 1.3;

  double log_lik(double alpha, double b1, double b2, double s21, double s22) const;
  double log_prior(double alpha, double b1, double b2, double s21, double s22) const;
};

// Log marginal likelihood by an exact finite decomposition: expanding each
// category's mixture probability binomially in the class weight t = Phi(alpha)
// reduces the marginal likelihood to a positive sum over per-category class
// splits k of  [binomials] * T(|k|) * A(k) * A(c - k),  where T is a
// one-dimensional integral over alpha and A is a smooth two-dimensional
// integral over one class's (b, log sigma2). Only low-dimensional composite
// Simpson rules are involved; grid_delta is the disagreement between the two
// refinement levels and should be near machine precision.
struct QuadResult {
  double log_ml = 0.0;
  double grid_delta = 0.0;
};
QuadResult tiny_log_marginal(const TinyModel& m, int level_coarse = 16, int level_fine = 24);

// Normalized log posterior ordinates on grids, with the remaining blocks held
// at fixed values (taken as exact):
//   alpha: 1-dim grid, beta and sigma2 pinned;
//   beta:  2-dim grid given alpha*, sigma2 pinned;
//   sigma2: 2-dim grid given alpha* and beta*.
double tiny_alpha_ordinate_grid(const TinyModel& m, double b1, double b2, double s21, double s22,
                                double alpha_star);
double tiny_beta_ordinate_grid(const TinyModel& m, double alpha_star, double s21, double s22,
                               double b1_star, double b2_star);
double tiny_sigma2_ordinate_grid(const TinyModel& m, double alpha_star, double b1, double b2,
                                 double s21_star, double s22_star);

// Analytic distribution of the builtin generator settings: class-2 share and
// per-class / marginal category probabilities, from the normal closure of the
// linear predictors.
struct SettingDist {
  double p_class2 = 0.0;
  std::array<double, 3> p_given_class1 = {0, 0, 0};
  std::array<double, 3> p_given_class2 = {0, 0, 0};
  std::array<double, 3> p_marginal = {0, 0, 0};
  std::array<double, 2> mean_xb = {0, 0};  // E[x'beta_s], not class-conditioned
};
SettingDist setting_distribution(int setting);

}  // namespace oracle
