#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "lcop/errors.hpp"
#include "lcop/math.hpp"
#include "oracles.hpp"

using namespace lcop;

TEST_CASE("normal cdf matches the long double reference") {
  for (double x = -8.0; x <= 8.0; x += 0.173) {
    const double ref = static_cast<double>(oracle::norm_cdf_ref(x));
    // scale(0) drops the additive unit term, making the tolerance purely
    // relative; the tail values are far below 1.
    CHECK(math::norm_cdf(x) == doctest::Approx(ref).epsilon(1e-13).scale(0.0));
  }
  CHECK(math::norm_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-16));
  // Frozen spot values.
  CHECK(math::norm_cdf(1.5) == doctest::Approx(0.9331927987311419).epsilon(1e-15));
  CHECK(math::norm_cdf(-1.5) == doctest::Approx(0.0668072012688581).epsilon(1e-15));
  CHECK(math::norm_cdf(0.5) == doctest::Approx(0.6914624612740131).epsilon(1e-15));
}

TEST_CASE("normal cdf agrees with direct Simpson integration of the density") {
  for (double x : {-3.0, -1.0, -0.25, 0.4, 1.0, 2.5, 5.0}) {
    CHECK(math::norm_cdf(x) == doctest::Approx(oracle::simpson_norm_cdf(x)).epsilon(1e-12));
  }
}

TEST_CASE("clamped cdf is the plain cdf inside the clamp and flat outside") {
  CHECK(math::norm_cdf_clamped(1.3) == math::norm_cdf(1.3));
  CHECK(math::norm_cdf_clamped(-7.9) == math::norm_cdf(-7.9));
  CHECK(math::norm_cdf_clamped(12.0) == math::norm_cdf(8.0));
  CHECK(math::norm_cdf_clamped(-40.0) == math::norm_cdf(-8.0));
  CHECK(math::norm_cdf_clamped(-40.0) > 0.0);
  CHECK(math::norm_cdf_clamped(40.0) < 1.0);
}

TEST_CASE("normal pdf and log pdf") {
  for (double x : {-4.0, -0.5, 0.0, 1.0, 3.7}) {
    const double ref = static_cast<double>(oracle::norm_pdf_ref(x));
    CHECK(math::norm_pdf(x) == doctest::Approx(ref).epsilon(1e-14));
    CHECK(math::norm_log_pdf(x) == doctest::Approx(std::log(ref)).epsilon(1e-13));
  }
}

TEST_CASE("inverse cdf round-trips through the cdf") {
  for (double p : {1e-12, 1e-6, 0.001, 0.025, 0.2, 0.5, 0.7, 0.975, 0.999, 1.0 - 1e-9}) {
    const double x = math::norm_ppf(p);
    CHECK(math::norm_cdf(x) == doctest::Approx(p).epsilon(1e-11).scale(0.0));
  }
  // Deep tail: relative accuracy of the cdf at the returned quantile.
  const double x = math::norm_ppf(1e-300);
  CHECK(static_cast<double>(oracle::norm_cdf_ref(x)) ==
        doctest::Approx(1e-300).epsilon(1e-9).scale(0.0));
  CHECK_THROWS_AS(math::norm_ppf(0.0), DomainError);
  CHECK_THROWS_AS(math::norm_ppf(1.0), DomainError);
  CHECK_THROWS_AS(math::norm_ppf(-0.2), DomainError);
}

TEST_CASE("gamma and inverse-gamma log densities") {
  // Direct formula checks.
  const double a = 4.3, b = 1.3, x = 0.7;
  const double g_ref = a * std::log(b) - std::lgamma(a) + (a - 1.0) * std::log(x) - b * x;
  CHECK(math::gamma_log_pdf(x, a, b) == doctest::Approx(g_ref).epsilon(1e-15));
  const double ig_ref = a * std::log(b) - std::lgamma(a) - (a + 1.0) * std::log(x) - b / x;
  CHECK(math::inv_gamma_log_pdf(x, a, b) == doctest::Approx(ig_ref).epsilon(1e-15));
  // Change of variables: IG(x) = Gamma(1/x) / x^2.
  for (double xx : {0.1, 0.5, 2.0, 9.0}) {
    CHECK(math::inv_gamma_log_pdf(xx, a, b) ==
          doctest::Approx(math::gamma_log_pdf(1.0 / xx, a, b) - 2.0 * std::log(xx))
              .epsilon(1e-13));
  }
}

TEST_CASE("multivariate normal log density") {
  // 1-dim reduces to the scalar normal.
  Eigen::VectorXd x1(1), m1(1);
  Eigen::MatrixXd c1(1, 1);
  x1 << 1.7;
  m1 << 0.4;
  c1 << 2.25;
  const double ref1 = math::norm_log_pdf((1.7 - 0.4) / 1.5) - std::log(1.5);
  CHECK(math::mvn_log_pdf(x1, m1, c1) == doctest::Approx(ref1).epsilon(1e-14));

  // 2-dim against the explicit inverse.
  Eigen::VectorXd x2(2), m2(2);
  Eigen::MatrixXd c2(2, 2);
  x2 << 0.3, -1.1;
  m2 << -0.2, 0.5;
  c2 << 2.0, 0.6, 0.6, 1.0;
  const double det = 2.0 * 1.0 - 0.36;
  Eigen::MatrixXd inv(2, 2);
  inv << 1.0 / det, -0.6 / det, -0.6 / det, 2.0 / det;
  Eigen::VectorXd r = x2 - m2;
  const double ref2 =
      -0.5 * (2.0 * math::kLogTwoPi + std::log(det) + r.dot(inv * r));
  CHECK(math::mvn_log_pdf(x2, m2, c2) == doctest::Approx(ref2).epsilon(1e-13));

  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;  // indefinite
  CHECK_THROWS_AS(math::mvn_log_pdf(x2, m2, bad), NumericalError);
}

TEST_CASE("multivariate t log density") {
  // 1-dim against the textbook scalar t density.
  Eigen::VectorXd x(1), mu(1);
  Eigen::MatrixXd sc(1, 1);
  x << 1.2;
  mu << 0.1;
  sc << 0.81;
  const double nu = 10.0;
  const double s = 0.9, t = (1.2 - 0.1) / s;
  const double ref = std::lgamma((nu + 1.0) / 2.0) - std::lgamma(nu / 2.0) -
                     0.5 * std::log(nu * std::acos(-1.0)) - std::log(s) -
                     (nu + 1.0) / 2.0 * std::log1p(t * t / nu);
  CHECK(math::mvt_log_pdf(x, mu, sc, nu) == doctest::Approx(ref).epsilon(1e-13));

  // Large dof approaches the normal with the same scale matrix.
  Eigen::VectorXd x2(3), m2(3);
  x2 << 0.4, -0.2, 1.0;
  m2 << 0.0, 0.1, 0.8;
  Eigen::MatrixXd c2 = Eigen::MatrixXd::Identity(3, 3) * 1.7;
  c2(0, 1) = c2(1, 0) = 0.4;
  CHECK(math::mvt_log_pdf(x2, m2, c2, 1e8) ==
        doctest::Approx(math::mvn_log_pdf(x2, m2, c2)).epsilon(1e-6));
}

TEST_CASE("log sum exp") {
  std::vector<double> v = {std::log(1.0), std::log(2.0), std::log(3.0)};
  CHECK(math::log_sum_exp(v) == doctest::Approx(std::log(6.0)).epsilon(1e-15));
  // Shift stability: adding a huge constant shifts the result exactly.
  std::vector<double> w = v;
  for (auto& t : w) t += 1000.0;
  CHECK(math::log_sum_exp(w) == doctest::Approx(std::log(6.0) + 1000.0).epsilon(1e-15));
  std::vector<double> z = {-2000.0, -2000.0};
  CHECK(math::log_sum_exp(z) == doctest::Approx(-2000.0 + std::log(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(math::log_sum_exp({}), ContractError);
}

TEST_CASE("log mean exp with batch-means error") {
  std::mt19937_64 gen(17);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<double> v(4000);
  long double direct = 0.0L;
  for (auto& t : v) {
    t = nd(gen);
    direct += expl(static_cast<long double>(t));
  }
  const double ref = static_cast<double>(logl(direct / v.size()));
  auto r = math::log_mean_exp_with_se(v, 20);
  CHECK(r.log_mean == doctest::Approx(ref).epsilon(1e-12));
  CHECK(r.se_log_mean > 0.0);
  CHECK(r.se_log_mean < 0.1);

  // A constant input has zero batch variation.
  std::vector<double> c(200, -3.7);
  auto rc = math::log_mean_exp_with_se(c, 20);
  CHECK(rc.log_mean == doctest::Approx(-3.7).epsilon(1e-14));
  CHECK(rc.se_log_mean == doctest::Approx(0.0).epsilon(1e-12));

  CHECK_THROWS_AS(math::log_mean_exp_with_se({1.0, 2.0}, 20), ContractError);
}
