#include "kernels_detail.hpp"

// Reference lane: plain loops, one slot per observation, no threading.
namespace lcop::kernels::serial {

using model::Cutpoints;
using model::Dataset;
using model::ParamDraw;

void class_cond_table(const Dataset& data, const std::array<VectorXd, 2>& beta,
                      const std::array<double, 2>& sigma2, const Cutpoints& cutpoints, double* p1,
                      double* p2) {
  const VectorXd xb1 = data.X * beta[0];
  const VectorXd xb2 = data.X * beta[1];
  const double sd1 = std::sqrt(sigma2[0]), sd2 = std::sqrt(sigma2[1]);
  for (int i = 0; i < data.n(); ++i) {
    p1[i] = detail::band_prob(data.y[i], xb1[i], sd1, cutpoints.gamma[0]);
    p2[i] = detail::band_prob(data.y[i], xb2[i], sd2, cutpoints.gamma[1]);
  }
}

void mixture_loglik_terms(const Dataset& data, const ParamDraw& theta, double* out) {
  const VectorXd xb1 = data.X * theta.beta[0];
  const VectorXd xb2 = data.X * theta.beta[1];
  const VectorXd eta = data.W * theta.alpha;
  const double sd1 = std::sqrt(theta.sigma2[0]), sd2 = std::sqrt(theta.sigma2[1]);
  for (int i = 0; i < data.n(); ++i) {
    double p1 = detail::band_prob(data.y[i], xb1[i], sd1, theta.cutpoints.gamma[0]);
    double p2 = detail::band_prob(data.y[i], xb2[i], sd2, theta.cutpoints.gamma[1]);
    double q1 = math::norm_cdf_clamped(-eta[i]);
    double q2 = math::norm_cdf_clamped(eta[i]);
    out[i] = std::log(detail::mix_prob(q1, q2, p1, p2));
  }
}

void alpha_mix_terms(const Dataset& data, const VectorXd& alpha, const double* p1,
                     const double* p2, double* log_mix, double* grad_coef) {
  const VectorXd eta = data.W * alpha;
  for (int i = 0; i < data.n(); ++i) {
    double t = std::clamp(eta[i], -math::kTailClamp, math::kTailClamp);
    double q1 = math::norm_cdf(-t);
    double q2 = math::norm_cdf(t);
    double m = detail::mix_prob(q1, q2, p1[i], p2[i]);
    log_mix[i] = std::log(m);
    if (grad_coef) grad_coef[i] = math::norm_pdf(t) * (p2[i] - p1[i]) / m;
  }
}

void draw_class_indicators(const Dataset& data, const VectorXd& alpha, const double* p1,
                           const double* p2, std::uint64_t seed, std::uint64_t sweep, int* u_out) {
  const VectorXd eta = data.W * alpha;
  for (int i = 0; i < data.n(); ++i) {
    double q2 = math::norm_cdf_clamped(eta[i]);
    double den = q2 * p2[i] + (1.0 - q2) * p1[i];
    double k = den > 0.0 ? q2 * p2[i] / den : q2;
    rng::Philox gen(seed, rng::obs_stream(rng::Purpose::kClassIndicator, sweep, i));
    u_out[i] = gen.bernoulli(k) ? 2 : 1;
  }
}

void draw_latent_outcomes(const Dataset& data, const std::array<VectorXd, 2>& beta,
                          const std::array<double, 2>& sigma2, const Cutpoints& cutpoints,
                          const int* u, std::uint64_t seed, std::uint64_t sweep, double* z_out) {
  const VectorXd xb1 = data.X * beta[0];
  const VectorXd xb2 = data.X * beta[1];
  const double sd[2] = {std::sqrt(sigma2[0]), std::sqrt(sigma2[1])};
  for (int i = 0; i < data.n(); ++i) {
    const int s = u[i] - 1;
    auto [lo, hi] = model::band_bounds(data.y[i], cutpoints.gamma[s]);
    rng::Philox gen(seed, rng::obs_stream(rng::Purpose::kLatentOutcome, sweep, i));
    z_out[i] = detail::tn_draw(gen, s == 0 ? xb1[i] : xb2[i], sd[s], lo, hi);
  }
}

void draw_latent_class(const Dataset& data, const VectorXd& alpha, const int* u,
                       std::uint64_t seed, std::uint64_t sweep, double* l_out) {
  const VectorXd eta = data.W * alpha;
  const double inf = std::numeric_limits<double>::infinity();
  for (int i = 0; i < data.n(); ++i) {
    rng::Philox gen(seed, rng::obs_stream(rng::Purpose::kLatentClass, sweep, i));
    l_out[i] = u[i] == 2 ? detail::tn_draw(gen, eta[i], 1.0, 0.0, inf)
                         : detail::tn_draw(gen, eta[i], 1.0, -inf, 0.0);
  }
}

}  // namespace lcop::kernels::serial
