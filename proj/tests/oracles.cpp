#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

namespace oracle {

namespace {

constexpr double kLogFloor = -745.0;  // below exp() underflow

double safe_log(double p) { return std::log(std::max(p, 1e-300)); }

double log_sum(std::vector<double>& terms) {
  double m = -std::numeric_limits<double>::infinity();
  for (double t : terms) m = std::max(m, t);
  if (!std::isfinite(m)) return m;
  long double s = 0.0L;
  for (double t : terms) s += expl(static_cast<long double>(t - m));
  return m + static_cast<double>(logl(s));
}

}  // namespace

long double norm_cdf_ref(long double x) { return 0.5L * erfcl(-x / sqrtl(2.0L)); }

long double norm_pdf_ref(long double x) {
  const long double inv_sqrt_2pi = 0.398942280401432677939946059934L;
  return inv_sqrt_2pi * expl(-0.5L * x * x);
}

double simpson_norm_cdf(double x, int panels) {
  if (panels % 2 == 1) ++panels;
  const long double a = 0.0L, b = x;
  const long double h = (b - a) / panels;
  long double s = norm_pdf_ref(a) + norm_pdf_ref(b);
  for (int i = 1; i < panels; ++i)
    s += norm_pdf_ref(a + i * h) * ((i % 2) ? 4.0L : 2.0L);
  return static_cast<double>(0.5L + s * h / 3.0L);
}

Eigen::VectorXd cutpoints_ref(int J, const Eigen::VectorXd& delta) {
  if (J < 3 || delta.size() != J - 3) throw std::invalid_argument("cutpoints_ref: bad sizes");
  Eigen::VectorXd gamma(J - 1);
  long double g = 0.0L;
  gamma[0] = 0.0;
  for (int k = 0; k + 1 <= J - 3; ++k) {
    const long double frac = 1.0L / (1.0L + expl(-static_cast<long double>(delta[k])));
    g = g + (1.0L - g) * frac;
    gamma[k + 1] = static_cast<double>(g);
  }
  gamma[J - 2] = 1.0;
  return gamma;
}

TruncMoments truncated_normal_moments(double mu, double sigma, double lo, double hi) {
  const long double a = std::isinf(lo) ? lo : (lo - mu) / sigma;
  const long double b = std::isinf(hi) ? hi : (hi - mu) / sigma;
  const long double pa = std::isinf(static_cast<double>(a)) ? 0.0L : norm_pdf_ref(a);
  const long double pb = std::isinf(static_cast<double>(b)) ? 0.0L : norm_pdf_ref(b);
  const long double z = norm_cdf_ref(b) - norm_cdf_ref(a);
  const long double apa = std::isinf(static_cast<double>(a)) ? 0.0L : a * pa;
  const long double bpb = std::isinf(static_cast<double>(b)) ? 0.0L : b * pb;
  TruncMoments out;
  out.mean = static_cast<double>(mu + sigma * (pa - pb) / z);
  out.var = static_cast<double>(sigma * sigma *
                                (1.0L + (apa - bpb) / z - ((pa - pb) / z) * ((pa - pb) / z)));
  return out;
}

Eigen::VectorXd ar1_series(int n, double rho, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::VectorXd x(n);
  x[0] = nd(gen);
  const double s = std::sqrt(1.0 - rho * rho);
  for (int t = 1; t < n; ++t) x[t] = rho * x[t - 1] + s * nd(gen);
  return x;
}

Eigen::VectorXd normal_series(int n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::VectorXd x(n);
  for (int t = 0; t < n; ++t) x[t] = nd(gen);
  return x;
}

double TinyModel::log_lik(double alpha, double b1, double b2, double s21, double s22) const {
  if (!(s21 > 0.0) || !(s22 > 0.0)) return kLogFloor * (counts[0] + counts[1] + counts[2] + 1);
  const double q2 = static_cast<double>(norm_cdf_ref(alpha));
  const double b[2] = {b1, b2};
  const double sd[2] = {std::sqrt(s21), std::sqrt(s22)};
  double pj[2][3];
  for (int s = 0; s < 2; ++s) {
    const double c0 = static_cast<double>(norm_cdf_ref((0.0 - b[s]) / sd[s]));
    const double c1 = static_cast<double>(norm_cdf_ref((1.0 - b[s]) / sd[s]));
    pj[s][0] = 1.0 - c1;  // top band z > 1
    pj[s][1] = c1 - c0;
    pj[s][2] = c0;  // bottom band z <= 0
  }
  double ll = 0.0;
  for (int j = 0; j < 3; ++j)
    ll += counts[j] * safe_log((1.0 - q2) * pj[0][j] + q2 * pj[1][j]);
  return ll;
}

double TinyModel::log_prior(double alpha, double b1, double b2, double s21, double s22) const {
  if (!(s21 > 0.0) || !(s22 > 0.0)) return 2 * kLogFloor;
  auto norm_lp = [](double x, double var) {
    return -0.5 * std::log(2.0 * std::acos(-1.0) * var) - 0.5 * x * x / var;
  };
  auto ig_lp = [this](double x) {
    return sig_shape * std::log(sig_scale) - std::lgamma(sig_shape) -
           (sig_shape + 1.0) * std::log(x) - sig_scale / x;
  };
  return norm_lp(alpha, alpha_var) + norm_lp(b1, beta_var) + norm_lp(b2, beta_var) + ig_lp(s21) +
         ig_lp(s22);
}

namespace {

// Composite-Simpson coefficient pattern 1,4,2,...,4,1 scaled by h/3.
std::vector<double> simpson_weights(int panels, double h) {
  std::vector<double> w(panels + 1, h / 3.0);
  for (int i = 1; i < panels; ++i) w[i] *= (i % 2 == 1) ? 4.0 : 2.0;
  return w;
}

// log A(k) = log E_prior[ P_1^{k_1} P_2^{k_2} P_3^{k_3} ] for every split
// k <= c, where P_j are one class's category probabilities as functions of
// (b, u = log sigma2). Flattened index ((k1*(c2+1))+k2)*(c3+1)+k3. A single
// Simpson grid serves all k because the integrand only ever gets smoother
// factors P^k multiplied onto the fixed prior weight.
std::vector<double> tiny_block_log_table(const TinyModel& m, int level) {
  const int nb = 12 * level, nu = 10 * level;
  const double b_lo = -8.0, b_hi = 8.0, u_lo = -7.0, u_hi = 5.0;
  const auto wb = simpson_weights(nb, (b_hi - b_lo) / nb);
  const auto wu = simpson_weights(nu, (u_hi - u_lo) / nu);
  const std::size_t npts = static_cast<std::size_t>(nb + 1) * (nu + 1);

  // Per grid point: log prior-times-weight and the three log category probs.
  std::vector<double> lw(npts), lp1(npts), lp2(npts), lp3(npts);
  const double log2pi = std::log(2.0 * std::acos(-1.0));
  std::size_t at = 0;
  for (int i = 0; i <= nb; ++i) {
    const double b = b_lo + i * (b_hi - b_lo) / nb;
    for (int j = 0; j <= nu; ++j, ++at) {
      const double u = u_lo + j * (u_hi - u_lo) / nu;
      const double s2 = std::exp(u);
      const double sd = std::sqrt(s2);
      // N(b; 0, beta_var) times the inverse-gamma density of s2 with the
      // Jacobian ds2 = e^u du folded in, times the Simpson weight.
      const double lprior = -0.5 * (log2pi + std::log(m.beta_var)) - 0.5 * b * b / m.beta_var +
                            m.sig_shape * std::log(m.sig_scale) - std::lgamma(m.sig_shape) -
                            m.sig_shape * u - m.sig_scale / s2;
      lw[at] = lprior + std::log(wb[i] * wu[j]);
      const double c0 = static_cast<double>(norm_cdf_ref((0.0 - b) / sd));
      const double c1 = static_cast<double>(norm_cdf_ref((1.0 - b) / sd));
      // Floor keeps k * lp finite; exp of the floored value is exactly zero.
      lp1[at] = std::max(safe_log(1.0 - c1), -1e5);
      lp2[at] = std::max(safe_log(c1 - c0), -1e5);
      lp3[at] = std::max(safe_log(c0), -1e5);
    }
  }

  const int c1n = m.counts[0] + 1, c2n = m.counts[1] + 1, c3n = m.counts[2] + 1;
  std::vector<double> out(static_cast<std::size_t>(c1n) * c2n * c3n);
  std::vector<double> e1(npts), e12(npts);
  // All terms are positive and A(k) >= exp(-|k| log 3 + O(1)) under the prior,
  // so a fixed +300 shift keeps the double-precision sums in range.
  const double shift = 300.0;
  for (int k1 = 0; k1 < c1n; ++k1) {
    for (std::size_t g = 0; g < npts; ++g) e1[g] = lw[g] + k1 * lp1[g];
    for (int k2 = 0; k2 < c2n; ++k2) {
      for (std::size_t g = 0; g < npts; ++g) e12[g] = e1[g] + k2 * lp2[g];
      for (int k3 = 0; k3 < c3n; ++k3) {
        long double acc = 0.0L;
        for (std::size_t g = 0; g < npts; ++g) acc += std::exp(e12[g] + k3 * lp3[g] + shift);
        out[(static_cast<std::size_t>(k1) * c2n + k2) * c3n + k3] =
            static_cast<double>(logl(acc)) - shift;
      }
    }
  }
  return out;
}

// log T(K) = log E_alpha[ (1 - Phi(alpha))^K Phi(alpha)^{n-K} ] for K = 0..n.
std::vector<double> tiny_class_weight_log_table(const TinyModel& m, int n, int level) {
  const int na = 100 * level;
  const double a_lo = -14.0, a_hi = 14.0;
  const auto wa = simpson_weights(na, (a_hi - a_lo) / na);
  std::vector<double> lw(na + 1), l1m(na + 1), lph(na + 1);
  const double log2pi = std::log(2.0 * std::acos(-1.0));
  for (int i = 0; i <= na; ++i) {
    const double a = a_lo + i * (a_hi - a_lo) / na;
    const double ph = static_cast<double>(norm_cdf_ref(a));
    lw[i] = -0.5 * (log2pi + std::log(m.alpha_var)) - 0.5 * a * a / m.alpha_var +
            std::log(wa[i]);
    l1m[i] = std::max(safe_log(1.0 - ph), -1e5);
    lph[i] = std::max(safe_log(ph), -1e5);
  }
  std::vector<double> out(n + 1);
  for (int K = 0; K <= n; ++K) {
    long double acc = 0.0L;
    for (int i = 0; i <= na; ++i) acc += std::exp(lw[i] + K * l1m[i] + (n - K) * lph[i]);
    out[K] = static_cast<double>(logl(acc));
  }
  return out;
}

double tiny_log_marginal_at(const TinyModel& m, int level) {
  const int n = m.counts[0] + m.counts[1] + m.counts[2];
  const auto logA = tiny_block_log_table(m, level);
  const auto logT = tiny_class_weight_log_table(m, n, level);
  auto lchoose = [](int nn, int kk) {
    return std::lgamma(nn + 1.0) - std::lgamma(kk + 1.0) - std::lgamma(nn - kk + 1.0);
  };
  const int c1n = m.counts[0] + 1, c2n = m.counts[1] + 1, c3n = m.counts[2] + 1;
  const auto idx = [&](int k1, int k2, int k3) {
    return (static_cast<std::size_t>(k1) * c2n + k2) * c3n + k3;
  };
  std::vector<double> terms;
  terms.reserve(logA.size());
  for (int k1 = 0; k1 < c1n; ++k1)
    for (int k2 = 0; k2 < c2n; ++k2)
      for (int k3 = 0; k3 < c3n; ++k3) {
        const double lB = lchoose(m.counts[0], k1) + lchoose(m.counts[1], k2) +
                          lchoose(m.counts[2], k3);
        terms.push_back(lB + logT[k1 + k2 + k3] + logA[idx(k1, k2, k3)] +
                        logA[idx(m.counts[0] - k1, m.counts[1] - k2, m.counts[2] - k3)]);
      }
  return log_sum(terms);
}

}  // namespace

QuadResult tiny_log_marginal(const TinyModel& m, int level_coarse, int level_fine) {
  QuadResult out;
  const double coarse = tiny_log_marginal_at(m, level_coarse);
  out.log_ml = tiny_log_marginal_at(m, level_fine);
  out.grid_delta = std::abs(out.log_ml - coarse);
  return out;
}

double tiny_alpha_ordinate_grid(const TinyModel& m, double b1, double b2, double s21, double s22,
                                double alpha_star) {
  auto logg = [&](double a) {
    return m.log_lik(a, b1, b2, s21, s22) - 0.5 * a * a / m.alpha_var -
           0.5 * std::log(2.0 * std::acos(-1.0) * m.alpha_var);
  };
  // Mode scan, then Simpson over a wide bracket.
  double mode = 0.0, best = logg(0.0);
  for (int i = -400; i <= 400; ++i) {
    const double a = i * 0.025;
    const double v = logg(a);
    if (v > best) {
      best = v;
      mode = a;
    }
  }
  const double lo = mode - 12.0, hi = mode + 12.0;
  const int n = 40000;  // even
  const double h = (hi - lo) / n;
  long double z = 0.0L;
  for (int i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 1.0 : ((i % 2) ? 4.0 : 2.0);
    z += w * expl(static_cast<long double>(logg(lo + i * h) - best));
  }
  const double log_z = best + static_cast<double>(logl(z * h / 3.0L));
  return logg(alpha_star) - log_z;
}

double tiny_beta_ordinate_grid(const TinyModel& m, double alpha_star, double s21, double s22,
                               double b1_star, double b2_star) {
  auto logg = [&](double b1, double b2) {
    return m.log_lik(alpha_star, b1, b2, s21, s22) -
           0.5 * (b1 * b1 + b2 * b2) / m.beta_var -
           std::log(2.0 * std::acos(-1.0) * m.beta_var);
  };
  double mode1 = 0.0, mode2 = 0.0, best = logg(0.0, 0.0);
  for (int i = -80; i <= 80; ++i)
    for (int j = -80; j <= 80; ++j) {
      const double v = logg(i * 0.05, j * 0.05);
      if (v > best) {
        best = v;
        mode1 = i * 0.05;
        mode2 = j * 0.05;
      }
    }
  const double span = 8.0;
  const int n = 800;  // even; Simpson in each dimension
  const double h1 = 2.0 * span / n, h2 = 2.0 * span / n;
  long double z = 0.0L;
  for (int i = 0; i <= n; ++i) {
    const double wi = (i == 0 || i == n) ? 1.0 : ((i % 2) ? 4.0 : 2.0);
    const double b1 = mode1 - span + i * h1;
    for (int j = 0; j <= n; ++j) {
      const double wj = (j == 0 || j == n) ? 1.0 : ((j % 2) ? 4.0 : 2.0);
      z += wi * wj * expl(static_cast<long double>(logg(b1, mode2 - span + j * h2) - best));
    }
  }
  const double log_z = best + static_cast<double>(logl(z * h1 * h2 / 9.0L));
  return logg(b1_star, b2_star) - log_z;
}

double tiny_sigma2_ordinate_grid(const TinyModel& m, double alpha_star, double b1, double b2,
                                 double s21_star, double s22_star) {
  auto ig_lp = [&](double x) {
    return m.sig_shape * std::log(m.sig_scale) - std::lgamma(m.sig_shape) -
           (m.sig_shape + 1.0) * std::log(x) - m.sig_scale / x;
  };
  // Work in u = log sigma2 with the Jacobian folded in.
  auto logg = [&](double u1, double u2) {
    const double s21 = std::exp(u1), s22 = std::exp(u2);
    return m.log_lik(alpha_star, b1, b2, s21, s22) + ig_lp(s21) + ig_lp(s22) + u1 + u2;
  };
  double mode1 = std::log(0.4), mode2 = std::log(0.4);
  double best = logg(mode1, mode2);
  for (int i = -60; i <= 60; ++i)
    for (int j = -60; j <= 60; ++j) {
      const double v = logg(i * 0.1, j * 0.1);
      if (v > best) {
        best = v;
        mode1 = i * 0.1;
        mode2 = j * 0.1;
      }
    }
  const double span = 9.0;
  const int n = 900;
  const double h = 2.0 * span / n;
  long double z = 0.0L;
  for (int i = 0; i <= n; ++i) {
    const double wi = (i == 0 || i == n) ? 1.0 : ((i % 2) ? 4.0 : 2.0);
    const double u1 = mode1 - span + i * h;
    for (int j = 0; j <= n; ++j) {
      const double wj = (j == 0 || j == n) ? 1.0 : ((j % 2) ? 4.0 : 2.0);
      z += wi * wj * expl(static_cast<long double>(logg(u1, mode2 - span + j * h) - best));
    }
  }
  const double log_z = best + static_cast<double>(logl(z * h * h / 9.0L));
  // Back to sigma2 coordinates: divide by the Jacobian at the evaluation point.
  return logg(std::log(s21_star), std::log(s22_star)) - log_z - std::log(s21_star) -
         std::log(s22_star);
}

SettingDist setting_distribution(int setting) {
  if (setting != 1 && setting != 2) throw std::invalid_argument("setting must be 1 or 2");
  const double a1 = -0.3, a2 = 1.5;
  Eigen::VectorXd mu_x(4), var_x(4);
  mu_x << 1.0, 0.5, 0.5, 0.0;
  var_x << 0.0, 1.0, 1.0, 0.8;
  Eigen::MatrixXd beta(2, 4);
  if (setting == 1)
    beta << 0.6, -0.7, -0.6, 0.5, 0.1, 0.6, 0.2, 0.8;
  else
    beta << 0.6, -0.6, -0.6, 0.5, 0.1, -0.1, -0.1, 0.8;
  const double sigma2 = 0.25;

  SettingDist out;
  out.p_class2 = static_cast<double>(norm_cdf_ref(a1 / std::sqrt(1.0 + a2 * a2)));
  for (int s = 0; s < 2; ++s) {
    const double mean = beta.row(s).dot(mu_x);
    double v = 0.0;
    for (int k = 0; k < 4; ++k) v += beta(s, k) * beta(s, k) * var_x[k];
    const double tau = std::sqrt(v + sigma2);
    const double c0 = static_cast<double>(norm_cdf_ref((0.0 - mean) / tau));
    const double c1 = static_cast<double>(norm_cdf_ref((1.0 - mean) / tau));
    std::array<double, 3> p = {1.0 - c1, c1 - c0, c0};
    (s == 0 ? out.p_given_class1 : out.p_given_class2) = p;
    out.mean_xb[s] = mean;
  }
  for (int j = 0; j < 3; ++j)
    out.p_marginal[j] =
        (1.0 - out.p_class2) * out.p_given_class1[j] + out.p_class2 * out.p_given_class2[j];
  return out;
}

}  // namespace oracle
