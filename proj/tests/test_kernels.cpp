#include <cmath>
#include <cstring>
#include <vector>

#include "doctest.h"
#include "lcop/kernels.hpp"
#include "lcop/model.hpp"
#include "lcop/sim.hpp"

using namespace lcop;
using Eigen::VectorXd;
using Eigen::VectorXi;

namespace {

struct Fixture {
  model::Dataset data;
  model::ParamDraw theta;

  Fixture() {
    auto spec = sim::builtin_setting(1);
    spec.n = 500;
    auto out = sim::generate(spec, 11);
    data = out.data;
    theta.alpha = spec.alpha_true;
    theta.beta = spec.beta_true;
    theta.sigma2 = spec.sigma2_true;
    theta.cutpoints = spec.cutpoints;
  }
};

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("class-conditional table: lanes agree bitwise and match the model layer") {
  Fixture f;
  const int n = f.data.n();
  std::vector<double> p1s(n), p2s(n), p1p(n), p2p(n);
  kernels::serial::class_cond_table(f.data, f.theta.beta, f.theta.sigma2, f.theta.cutpoints,
                                    p1s.data(), p2s.data());
  kernels::omp_lane::class_cond_table(f.data, f.theta.beta, f.theta.sigma2, f.theta.cutpoints,
                                      p1p.data(), p2p.data());
  CHECK(bitwise_equal(p1s, p1p));
  CHECK(bitwise_equal(p2s, p2p));
  for (int i = 0; i < n; i += 17) {
    const VectorXd x = f.data.X.row(i);
    const VectorXd a = model::ordinal_class_cond_probs(x, f.theta.beta[0], f.theta.sigma2[0],
                                                       f.theta.cutpoints.gamma[0]);
    const VectorXd b = model::ordinal_class_cond_probs(x, f.theta.beta[1], f.theta.sigma2[1],
                                                       f.theta.cutpoints.gamma[1]);
    CHECK(p1s[i] == doctest::Approx(a[f.data.y[i] - 1]).epsilon(1e-14));
    CHECK(p2s[i] == doctest::Approx(b[f.data.y[i] - 1]).epsilon(1e-14));
  }
}

TEST_CASE("mixture log-likelihood terms: lanes agree and compose to the total") {
  Fixture f;
  const int n = f.data.n();
  std::vector<double> ts(n), tp(n);
  kernels::serial::mixture_loglik_terms(f.data, f.theta, ts.data());
  kernels::omp_lane::mixture_loglik_terms(f.data, f.theta, tp.data());
  CHECK(bitwise_equal(ts, tp));
  double direct = 0.0;
  for (int i = 0; i < n; ++i) {
    const VectorXd mix = model::mixture_outcome_probs(f.data.X.row(i), f.data.W.row(i), f.theta);
    direct += std::log(mix[f.data.y[i] - 1]);
    CHECK(ts[i] == doctest::Approx(std::log(mix[f.data.y[i] - 1])).epsilon(1e-12));
  }
  double total = 0.0;
  for (double t : ts) total += t;
  CHECK(total == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("class-membership mix terms: values and analytic gradient") {
  Fixture f;
  const int n = f.data.n();
  std::vector<double> p1(n), p2(n);
  kernels::class_cond_table(Exec::serial, f.data, f.theta.beta, f.theta.sigma2,
                            f.theta.cutpoints, p1.data(), p2.data());

  auto eval = [&](const VectorXd& alpha, std::vector<double>* grad_coef) {
    std::vector<double> lm(n), gc(n);
    kernels::serial::alpha_mix_terms(f.data, alpha, p1.data(), p2.data(), lm.data(),
                                     grad_coef ? gc.data() : nullptr);
    if (grad_coef) *grad_coef = gc;
    double s = 0.0;
    for (double t : lm) s += t;
    return s;
  };

  // Lane agreement, with and without the gradient output.
  {
    std::vector<double> lms(n), lmp(n), gcs(n), gcp(n);
    kernels::serial::alpha_mix_terms(f.data, f.theta.alpha, p1.data(), p2.data(), lms.data(),
                                     gcs.data());
    kernels::omp_lane::alpha_mix_terms(f.data, f.theta.alpha, p1.data(), p2.data(), lmp.data(),
                                       gcp.data());
    CHECK(bitwise_equal(lms, lmp));
    CHECK(bitwise_equal(gcs, gcp));
    // Values: log of the mixed likelihood of the observed category.
    for (int i = 0; i < n; i += 29) {
      const double q2 = model::class_prob(f.data.W.row(i), f.theta.alpha);
      CHECK(lms[i] ==
            doctest::Approx(std::log((1.0 - q2) * p1[i] + q2 * p2[i])).epsilon(1e-12));
    }
  }

  // Gradient against central differences of the summed terms.
  std::vector<double> gc;
  eval(f.theta.alpha, &gc);
  for (int k = 0; k < f.data.p(); ++k) {
    double analytic = 0.0;
    for (int i = 0; i < n; ++i) analytic += gc[i] * f.data.W(i, k);
    const double h = 1e-6;
    VectorXd up = f.theta.alpha, dn = f.theta.alpha;
    up[k] += h;
    dn[k] -= h;
    const double fd = (eval(up, nullptr) - eval(dn, nullptr)) / (2.0 * h);
    CHECK(analytic == doctest::Approx(fd).epsilon(2e-5));
  }
}

TEST_CASE("class indicator draws: lanes agree, reproducible, probit frequencies") {
  Fixture f;
  const int n = f.data.n();
  std::vector<double> p1(n), p2(n);
  kernels::class_cond_table(Exec::serial, f.data, f.theta.beta, f.theta.sigma2,
                            f.theta.cutpoints, p1.data(), p2.data());
  std::vector<int> us(n), up(n), us2(n);
  kernels::serial::draw_class_indicators(f.data, f.theta.alpha, p1.data(), p2.data(), 99, 3,
                                         us.data());
  kernels::omp_lane::draw_class_indicators(f.data, f.theta.alpha, p1.data(), p2.data(), 99, 3,
                                           up.data());
  CHECK(std::memcmp(us.data(), up.data(), n * sizeof(int)) == 0);
  kernels::serial::draw_class_indicators(f.data, f.theta.alpha, p1.data(), p2.data(), 99, 3,
                                         us2.data());
  CHECK(std::memcmp(us.data(), us2.data(), n * sizeof(int)) == 0);
  for (int i = 0; i < n; ++i) CHECK((us[i] == 1 || us[i] == 2));

  // Different sweep or seed moves the draws.
  std::vector<int> other(n);
  kernels::serial::draw_class_indicators(f.data, f.theta.alpha, p1.data(), p2.data(), 99, 4,
                                         other.data());
  CHECK(std::memcmp(us.data(), other.data(), n * sizeof(int)) != 0);
  kernels::serial::draw_class_indicators(f.data, f.theta.alpha, p1.data(), p2.data(), 98, 3,
                                         other.data());
  CHECK(std::memcmp(us.data(), other.data(), n * sizeof(int)) != 0);

  // With a flat outcome table the posterior class probability reduces to the
  // probit prior; compare aggregate frequencies across many sweeps.
  std::vector<double> flat(n, 0.5);
  double expected = 0.0;
  for (int i = 0; i < n; ++i) expected += model::class_prob(f.data.W.row(i), f.theta.alpha);
  expected /= n;
  long hits = 0;
  const int sweeps = 200;
  std::vector<int> u(n);
  for (int t = 1; t <= sweeps; ++t) {
    kernels::serial::draw_class_indicators(f.data, f.theta.alpha, flat.data(), flat.data(), 7,
                                           t, u.data());
    for (int i = 0; i < n; ++i) hits += u[i] == 2;
  }
  CHECK(static_cast<double>(hits) / (n * sweeps) == doctest::Approx(expected).epsilon(0.03));
}

TEST_CASE("latent outcome draws stay inside the band of the observed category") {
  Fixture f;
  const int n = f.data.n();
  std::vector<double> p1(n), p2(n);
  kernels::class_cond_table(Exec::serial, f.data, f.theta.beta, f.theta.sigma2,
                            f.theta.cutpoints, p1.data(), p2.data());
  std::vector<int> u(n);
  kernels::serial::draw_class_indicators(f.data, f.theta.alpha, p1.data(), p2.data(), 5, 1,
                                         u.data());
  std::vector<double> zs(n), zp(n);
  kernels::serial::draw_latent_outcomes(f.data, f.theta.beta, f.theta.sigma2, f.theta.cutpoints,
                                        u.data(), 5, 1, zs.data());
  kernels::omp_lane::draw_latent_outcomes(f.data, f.theta.beta, f.theta.sigma2,
                                          f.theta.cutpoints, u.data(), 5, 1, zp.data());
  CHECK(bitwise_equal(zs, zp));
  for (int i = 0; i < n; ++i) {
    const auto band =
        model::band_bounds(f.data.y[i], f.theta.cutpoints.gamma[u[i] - 1]);
    CHECK(zs[i] > band.first);
    CHECK(zs[i] <= band.second);
    CHECK(std::isfinite(zs[i]));
  }
}

TEST_CASE("latent class utility draws carry the sign of the indicator") {
  Fixture f;
  const int n = f.data.n();
  std::vector<int> u(n);
  for (int i = 0; i < n; ++i) u[i] = 1 + (i % 2);
  std::vector<double> ls(n), lp(n);
  kernels::serial::draw_latent_class(f.data, f.theta.alpha, u.data(), 21, 2, ls.data());
  kernels::omp_lane::draw_latent_class(f.data, f.theta.alpha, u.data(), 21, 2, lp.data());
  CHECK(bitwise_equal(ls, lp));
  for (int i = 0; i < n; ++i) {
    CHECK(std::isfinite(ls[i]));
    if (u[i] == 2)
      CHECK(ls[i] > 0.0);
    else
      CHECK(ls[i] <= 0.0);
  }
}

TEST_CASE("dispatchers route to the lanes") {
  Fixture f;
  const int n = f.data.n();
  std::vector<double> a(n), b(n), c(n), d(n);
  kernels::class_cond_table(Exec::serial, f.data, f.theta.beta, f.theta.sigma2,
                            f.theta.cutpoints, a.data(), b.data());
  kernels::class_cond_table(Exec::parallel, f.data, f.theta.beta, f.theta.sigma2,
                            f.theta.cutpoints, c.data(), d.data());
  CHECK(bitwise_equal(a, c));
  CHECK(bitwise_equal(b, d));
}
