#include "lcop/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lcop/errors.hpp"
#include "lcop/kernels.hpp"
#include "lcop/math.hpp"

namespace lcop::samplers {

namespace {

constexpr double kEigenvalueFloor = 1e-10;

struct PriorCache {
  MatrixXd A0inv;
  VectorXd A0inv_alpha0;
  double A0_log_det = 0.0;
  std::array<MatrixXd, 2> B0inv;
  std::array<VectorXd, 2> B0inv_beta0;
  std::array<MatrixXd, 2> D0inv;
  std::array<VectorXd, 2> D0inv_delta0;

  static PriorCache build(const PriorSpec& prior, int J) {
    PriorCache c;
    const int p = static_cast<int>(prior.alpha0.size());
    Eigen::LLT<MatrixXd> llt(prior.A0);
    if (llt.info() != Eigen::Success) throw ValidationError("prior: A0 is not SPD");
    c.A0inv = llt.solve(MatrixXd::Identity(p, p));
    c.A0inv_alpha0 = c.A0inv * prior.alpha0;
    for (int i = 0; i < p; ++i) c.A0_log_det += 2.0 * std::log(llt.matrixL()(i, i));
    for (int s = 0; s < 2; ++s) {
      const int q = static_cast<int>(prior.beta0[s].size());
      Eigen::LLT<MatrixXd> lltb(prior.B0[s]);
      if (lltb.info() != Eigen::Success) throw ValidationError("prior: B0 is not SPD");
      c.B0inv[s] = lltb.solve(MatrixXd::Identity(q, q));
      c.B0inv_beta0[s] = c.B0inv[s] * prior.beta0[s];
      if (J > 3) {
        const int m = J - 3;
        Eigen::LLT<MatrixXd> lltd(prior.D0[s]);
        if (lltd.info() != Eigen::Success) throw ValidationError("prior: D0 is not SPD");
        c.D0inv[s] = lltd.solve(MatrixXd::Identity(m, m));
        c.D0inv_delta0[s] = c.D0inv[s] * prior.delta0[s];
      }
    }
    return c;
  }
};

// Shared class-conditional probability table, captured by kernels.
struct Table {
  VectorXd p1, p2;
};

optimize::ObjFn alpha_kernel_from_table(const Dataset& data, std::shared_ptr<const Table> table,
                                        const PriorSpec& prior, Exec exec) {
  auto a0 = std::make_shared<VectorXd>(prior.alpha0);
  auto llt = std::make_shared<Eigen::LLT<MatrixXd>>(prior.A0);
  if (llt->info() != Eigen::Success) throw ValidationError("prior: A0 is not SPD");
  double log_det = 0.0;
  for (int i = 0; i < prior.A0.rows(); ++i) log_det += 2.0 * std::log(llt->matrixL()(i, i));
  const double prior_const = -0.5 * prior.A0.rows() * math::kLogTwoPi - 0.5 * log_det;
  const Dataset* d = &data;
  return [d, table, a0, llt, prior_const, exec](const VectorXd& a, VectorXd* grad) -> double {
    const int n = d->n();
    VectorXd log_mix(n), gc;
    double* gcp = nullptr;
    if (grad) {
      gc.resize(n);
      gcp = gc.data();
    }
    kernels::alpha_mix_terms(exec, *d, a, table->p1.data(), table->p2.data(), log_mix.data(), gcp);
    double val = 0.0;
    for (int i = 0; i < n; ++i) val += log_mix[i];
    VectorXd r = a - *a0;
    VectorXd a0inv_r = llt->solve(r);
    val += prior_const - 0.5 * r.dot(a0inv_r);
    if (grad) *grad = d->W.transpose() * gc - a0inv_r;
    return val;
  };
}

std::shared_ptr<Table> build_table(const Dataset& data, const std::array<VectorXd, 2>& beta,
                                   const std::array<double, 2>& sigma2, const Cutpoints& cutpoints,
                                   Exec exec) {
  auto t = std::make_shared<Table>();
  t->p1.resize(data.n());
  t->p2.resize(data.n());
  kernels::class_cond_table(exec, data, beta, sigma2, cutpoints, t->p1.data(), t->p2.data());
  return t;
}

TailoredProposal proposal_from_kernel(const optimize::ObjFn& kernel, int dim,
                                      const RunConfig& config, bool* converged_out) {
  auto res = optimize::maximize_bfgs(kernel, VectorXd::Zero(dim), config.optimizer_max_iter,
                                     config.optimizer_grad_tol);
  MatrixXd hess = optimize::central_diff_hessian(kernel, res.mode);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(-hess);
  if (es.info() != Eigen::Success)
    throw NumericalError("tailored proposal: Hessian eigendecomposition failed");
  VectorXd vals = es.eigenvalues().cwiseMax(kEigenvalueFloor);
  MatrixXd cov =
      es.eigenvectors() * vals.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  if (!res.converged) cov *= 4.0;
  TailoredProposal prop;
  prop.mode = res.mode;
  prop.cov = 0.5 * (cov + cov.transpose());
  prop.dof = config.proposal_dof;
  prop.converged = res.converged;
  if (converged_out) *converged_out = res.converged;
  return prop;
}

// Log target for the joint (beta_s, delta_s) block on class-s observations,
// marginal of z, with analytic gradient. v = [beta; delta].
optimize::ObjFn beta_delta_kernel(const Dataset& data, const VectorXi& u, int s, double sigma2_s,
                                  const PriorSpec& prior, const PriorCache& cache) {
  const Dataset* d = &data;
  const VectorXi* uptr = &u;
  const int J = data.J;
  const int q = data.q();
  const double sd = std::sqrt(sigma2_s);
  const int si = s - 1;
  const VectorXd* beta0 = &prior.beta0[si];
  const VectorXd* delta0 = &prior.delta0[si];
  const MatrixXd* B0inv = &cache.B0inv[si];
  const MatrixXd* D0inv = &cache.D0inv[si];
  return [=](const VectorXd& v, VectorXd* grad) -> double {
    const int m = J - 3;
    VectorXd beta = v.head(q);
    VectorXd delta = v.tail(m);
    VectorXd gamma;
    try {
      gamma = model::cutpoints_from_delta(J, delta);
    } catch (const NumericalError&) {
      // delta far enough out to underflow the cut-point increments has zero
      // posterior density; -inf makes the MH step reject and the line search
      // backtrack instead of aborting the sweep.
      if (grad) grad->setZero(v.size());
      return -std::numeric_limits<double>::infinity();
    }
    double val = 0.0;
    VectorXd dbeta = VectorXd::Zero(q);
    VectorXd dgam = VectorXd::Zero(m);  // wrt interior cut-points gamma[1..J-3]
    const VectorXd xb = d->X * beta;
    for (int i = 0; i < d->n(); ++i) {
      if ((*uptr)[i] != s) continue;
      const int y = d->y[i];
      auto [lo, hi] = model::band_bounds(y, gamma);
      const double arg_hi = (hi - xb[i]) / sd;
      const double arg_lo = (lo - xb[i]) / sd;
      const double c_hi = (y == 1) ? 1.0 : math::norm_cdf_clamped(arg_hi);
      const double c_lo = (y == J) ? 0.0 : math::norm_cdf_clamped(arg_lo);
      const double phi_hi = (y == 1) ? 0.0 : math::norm_pdf(arg_hi);
      const double phi_lo = (y == J) ? 0.0 : math::norm_pdf(arg_lo);
      double prob = c_hi - c_lo;
      if (prob < 1e-300) prob = 1e-300;
      val += std::log(prob);
      if (grad) {
        const double inv_ps = 1.0 / (prob * sd);
        dbeta += (phi_lo - phi_hi) * inv_ps * d->X.row(i).transpose();
        // Only interior cut-points are free: gamma array index 1..J-3.
        const int hi_idx = J - y;      // 0-based index of the upper cut-point
        const int lo_idx = J - y - 1;  // lower one
        if (y != 1 && hi_idx >= 1 && hi_idx <= J - 3) dgam[hi_idx - 1] += phi_hi * inv_ps;
        if (y != J && lo_idx >= 1 && lo_idx <= J - 3) dgam[lo_idx - 1] -= phi_lo * inv_ps;
      }
    }
    VectorXd rb = beta - *beta0;
    VectorXd rd = delta - *delta0;
    val += -0.5 * rb.dot(*B0inv * rb) - 0.5 * rd.dot(*D0inv * rd);
    if (grad) {
      // Chain rule through the stick-breaking recursion:
      // gamma[k+1] = gamma[k] + (1 - gamma[k]) * logistic(delta[k]).
      MatrixXd jac = MatrixXd::Zero(m, m);
      for (int k = 0; k < m; ++k) {
        const double frac = 1.0 / (1.0 + std::exp(-delta[k]));
        const double g_prev = gamma[k];
        for (int mm = 0; mm < k; ++mm) jac(k, mm) = (1.0 - frac) * jac(k - 1, mm);
        jac(k, k) = (1.0 - g_prev) * frac * (1.0 - frac);
      }
      grad->resize(q + m);
      grad->head(q) = dbeta - *B0inv * rb;
      grad->tail(m) = jac.transpose() * dgam - *D0inv * rd;
    }
    return val;
  };
}

}  // namespace

void RunConfig::validate() const {
  if (n_iter < 1) throw ContractError("RunConfig: n_iter must be positive");
  if (burn_in < 0 || burn_in >= n_iter)
    throw ContractError("RunConfig: need 0 <= burn_in < n_iter");
  if (!(proposal_dof > 2.0))
    throw ContractError("RunConfig: proposal_dof must exceed 2");
  if (optimizer_max_iter < 1) throw ContractError("RunConfig: optimizer_max_iter must be positive");
  if (!(optimizer_grad_tol > 0.0)) throw ContractError("RunConfig: optimizer_grad_tol must be positive");
}

const MatrixXd& TailoredProposal::chol() const {
  if (chol_.size() == 0) {
    Eigen::LLT<MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
      throw NumericalError("TailoredProposal: covariance factorization failed");
    chol_ = llt.matrixL();
  }
  return chol_;
}

VectorXd TailoredProposal::draw(rng::Philox& gen) const {
  const int p = static_cast<int>(mode.size());
  VectorXd zed(p);
  for (int k = 0; k < p; ++k) zed[k] = gen.normal();
  double chi2 = 2.0 * gen.gamma(0.5 * dof);
  return mode + chol() * zed * std::sqrt(dof / chi2);
}

double TailoredProposal::log_pdf(const VectorXd& x) const {
  return math::mvt_log_pdf(x, mode, cov, dof);
}

std::pair<VectorXd, MatrixXd> beta_posterior_moments(const Dataset& data, const VectorXd& z,
                                                     const VectorXi& u, int s, double sigma2,
                                                     const PriorSpec& prior) {
  if (s != 1 && s != 2) throw ContractError("beta_posterior_moments: s must be 1 or 2");
  if (!(sigma2 > 0.0)) throw DomainError("beta_posterior_moments: sigma2 must be positive");
  const int q = data.q();
  Eigen::LLT<MatrixXd> llt0(prior.B0[s - 1]);
  if (llt0.info() != Eigen::Success) throw ValidationError("prior: B0 is not SPD");
  MatrixXd prec = llt0.solve(MatrixXd::Identity(q, q));
  VectorXd rhs = prec * prior.beta0[s - 1];
  const double inv_s2 = 1.0 / sigma2;
  for (int i = 0; i < data.n(); ++i) {
    if (u[i] != s) continue;
    prec.noalias() += inv_s2 * data.X.row(i).transpose() * data.X.row(i);
    rhs.noalias() += (inv_s2 * z[i]) * data.X.row(i).transpose();
  }
  Eigen::LLT<MatrixXd> llt(prec);
  if (llt.info() != Eigen::Success) throw NumericalError("beta_posterior_moments: precision not SPD");
  MatrixXd cov = llt.solve(MatrixXd::Identity(q, q));
  VectorXd mean = llt.solve(rhs);
  return {mean, cov};
}

std::pair<double, double> sigma2_posterior_params(const Dataset& data, const VectorXd& z,
                                                  const VectorXi& u, int s, const VectorXd& beta_s,
                                                  const PriorSpec& prior) {
  if (s != 1 && s != 2) throw ContractError("sigma2_posterior_params: s must be 1 or 2");
  double ssr = 0.0;
  int n_s = 0;
  for (int i = 0; i < data.n(); ++i) {
    if (u[i] != s) continue;
    double r = z[i] - data.X.row(i).dot(beta_s);
    ssr += r * r;
    ++n_s;
  }
  return {0.5 * (prior.v + n_s), 0.5 * (prior.d + ssr)};
}

std::pair<VectorXd, MatrixXd> alpha_conditional_moments(const Dataset& data, const VectorXd& l,
                                                        const PriorSpec& prior) {
  const int p = data.p();
  Eigen::LLT<MatrixXd> llt0(prior.A0);
  if (llt0.info() != Eigen::Success) throw ValidationError("prior: A0 is not SPD");
  MatrixXd prec = llt0.solve(MatrixXd::Identity(p, p));
  VectorXd rhs = prec * prior.alpha0 + data.W.transpose() * l;
  prec.noalias() += data.W.transpose() * data.W;
  Eigen::LLT<MatrixXd> llt(prec);
  if (llt.info() != Eigen::Success)
    throw NumericalError("alpha_conditional_moments: precision not SPD");
  MatrixXd cov = llt.solve(MatrixXd::Identity(p, p));
  VectorXd mean = llt.solve(rhs);
  return {mean, cov};
}

std::array<VectorXd, 2> draw_beta(const Dataset& data, const VectorXd& z, const VectorXi& u,
                                  const std::array<double, 2>& sigma2, const PriorSpec& prior,
                                  rng::Philox& gen) {
  std::array<VectorXd, 2> out;
  for (int s = 1; s <= 2; ++s) {
    auto [mean, cov] = beta_posterior_moments(data, z, u, s, sigma2[s - 1], prior);
    Eigen::LLT<MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) throw NumericalError("draw_beta: covariance not SPD");
    VectorXd zed(mean.size());
    for (int k = 0; k < mean.size(); ++k) zed[k] = gen.normal();
    out[s - 1] = mean + llt.matrixL() * zed;
  }
  return out;
}

std::array<double, 2> draw_sigma2(const Dataset& data, const VectorXd& z, const VectorXi& u,
                                  const std::array<VectorXd, 2>& beta, const PriorSpec& prior,
                                  rng::Philox& gen) {
  std::array<double, 2> out;
  for (int s = 1; s <= 2; ++s) {
    auto [shape, scale] = sigma2_posterior_params(data, z, u, s, beta[s - 1], prior);
    out[s - 1] = gen.inv_gamma(shape, scale);
  }
  return out;
}

VectorXi draw_class_indicators(const Dataset& data, const VectorXd& alpha,
                               const std::array<VectorXd, 2>& beta,
                               const std::array<double, 2>& sigma2, const Cutpoints& cutpoints,
                               std::uint64_t seed, std::uint64_t sweep, Exec exec) {
  auto table = build_table(data, beta, sigma2, cutpoints, exec);
  VectorXi u(data.n());
  kernels::draw_class_indicators(exec, data, alpha, table->p1.data(), table->p2.data(), seed,
                                 sweep, u.data());
  return u;
}

VectorXd draw_latent_z(const Dataset& data, const std::array<VectorXd, 2>& beta,
                       const std::array<double, 2>& sigma2, const Cutpoints& cutpoints,
                       const VectorXi& u, std::uint64_t seed, std::uint64_t sweep, Exec exec) {
  VectorXd z(data.n());
  kernels::draw_latent_outcomes(exec, data, beta, sigma2, cutpoints, u.data(), seed, sweep,
                                z.data());
  return z;
}

optimize::ObjFn make_alpha_kernel(const Dataset& data, const std::array<VectorXd, 2>& beta,
                                  const std::array<double, 2>& sigma2, const Cutpoints& cutpoints,
                                  const PriorSpec& prior, Exec exec) {
  return alpha_kernel_from_table(data, build_table(data, beta, sigma2, cutpoints, exec), prior,
                                 exec);
}

TailoredProposal build_tailored_proposal(const Dataset& data, const std::array<VectorXd, 2>& beta,
                                         const std::array<double, 2>& sigma2,
                                         const Cutpoints& cutpoints, const PriorSpec& prior,
                                         const RunConfig& config,
                                         std::vector<std::string>* warnings) {
  auto kernel = make_alpha_kernel(data, beta, sigma2, cutpoints, prior, config.exec);
  bool converged = true;
  TailoredProposal prop = proposal_from_kernel(kernel, data.p(), config, &converged);
  if (!converged && warnings)
    warnings->push_back("tailored proposal: mode search hit the iteration cap; covariance inflated");
  return prop;
}

MhResult draw_alpha_mh(const VectorXd& current, const TailoredProposal& proposal,
                       const optimize::ObjFn& kernel, rng::Philox& gen) {
  VectorXd cand = proposal.draw(gen);
  const double k_cur = kernel(current, nullptr);
  const double k_cand = kernel(cand, nullptr);
  double log_ratio = (k_cand - k_cur) + (proposal.log_pdf(current) - proposal.log_pdf(cand));
  if (!std::isfinite(log_ratio)) log_ratio = -std::numeric_limits<double>::infinity();
  const bool accept = std::log(gen.uniform()) < std::min(0.0, log_ratio);
  return {accept ? cand : current, accept};
}

BetaDeltaResult draw_beta_delta_joint(const Dataset& data, const VectorXi& u, int s,
                                      const VectorXd& beta_s, const VectorXd& delta_s,
                                      double sigma2_s, const PriorSpec& prior,
                                      const RunConfig& config, rng::Philox& gen,
                                      std::vector<std::string>* warnings) {
  if (data.J <= 3) throw ContractError("draw_beta_delta_joint: requires J > 3");
  PriorCache cache = PriorCache::build(prior, data.J);
  auto kernel = beta_delta_kernel(data, u, s, sigma2_s, prior, cache);
  bool converged = true;
  TailoredProposal prop =
      proposal_from_kernel(kernel, data.q() + data.J - 3, config, &converged);
  if (!converged && warnings)
    warnings->push_back("beta-delta proposal: mode search hit the iteration cap; covariance inflated");
  VectorXd cur(data.q() + data.J - 3);
  cur << beta_s, delta_s;
  VectorXd cand = prop.draw(gen);
  double log_ratio =
      (kernel(cand, nullptr) - kernel(cur, nullptr)) + (prop.log_pdf(cur) - prop.log_pdf(cand));
  if (!std::isfinite(log_ratio)) log_ratio = -std::numeric_limits<double>::infinity();
  const bool accept = std::log(gen.uniform()) < std::min(0.0, log_ratio);
  BetaDeltaResult res;
  res.beta = accept ? VectorXd(cand.head(data.q())) : beta_s;
  res.delta = accept ? VectorXd(cand.tail(data.J - 3)) : delta_s;
  res.accepted = accept;
  return res;
}

// ---------------------------------------------------------------------------

struct GibbsSweeper::Impl {
  const Dataset& data;
  PriorSpec prior;
  RunConfig cfg;
  std::uint64_t seed;
  PriorCache cache;
  model::ChainState st;
  rng::Philox chain;
  std::shared_ptr<Table> table;
  Eigen::LLT<MatrixXd> alpha_full_llt;  // precision A0inv + W'W, constant
  bool alpha_accepted = true;
  std::array<bool, 2> bd_accepted = {true, true};
  int proposal_failures = 0;
  std::vector<std::string> warns;

  Impl(const Dataset& d, const PriorSpec& pr, const RunConfig& c, std::uint64_t sd)
      : data(d), prior(pr), cfg(c), seed(sd), cache(PriorCache::build(pr, d.J)),
        chain(sd, rng::kChainStream) {
    MatrixXd prec = cache.A0inv + data.W.transpose() * data.W;
    alpha_full_llt.compute(prec);
    if (alpha_full_llt.info() != Eigen::Success)
      throw NumericalError("full sampler: class-layer precision not SPD");
  }

  void init_params() {
    st.params.alpha = VectorXd::Zero(data.p());
    st.params.beta[0] = VectorXd::Zero(data.q());
    st.params.beta[1] = VectorXd::Zero(data.q());
    const double prior_mean = prior.v > 2.0 ? prior.d / (prior.v - 2.0) : 1.0;
    st.params.sigma2 = {prior_mean, prior_mean};
    st.params.cutpoints = Cutpoints::fixed_default(data.J);
  }

  void init_latents() {
    const int n = data.n();
    st.u.resize(n);
    st.z.resize(n);
    st.l.resize(n);
    // Independent fair coin per observation via the sweep-0 substreams.
    int* up = st.u.data();
    lcop::parallel_for(cfg.exec, n, [&](std::int64_t i) {
      rng::Philox g(seed, rng::obs_stream(rng::Purpose::kClassIndicator, 0, i));
      up[i] = g.bernoulli(0.5) ? 2 : 1;
    });
    kernels::draw_latent_outcomes(cfg.exec, data, st.params.beta, st.params.sigma2,
                                  st.params.cutpoints, st.u.data(), seed, 0, st.z.data());
  }

  void refresh_latents_from_params() {
    const int n = data.n();
    st.u.resize(n);
    st.z.resize(n);
    st.l.resize(n);
    rebuild_table();
    kernels::draw_class_indicators(cfg.exec, data, st.params.alpha, table->p1.data(),
                                   table->p2.data(), seed, 0, st.u.data());
    kernels::draw_latent_outcomes(cfg.exec, data, st.params.beta, st.params.sigma2,
                                  st.params.cutpoints, st.u.data(), seed, 0, st.z.data());
  }

  void rebuild_table() {
    table = build_table(data, st.params.beta, st.params.sigma2, st.params.cutpoints, cfg.exec);
  }

  void step_beta() {
    std::array<MatrixXd, 2> prec = {cache.B0inv[0], cache.B0inv[1]};
    std::array<VectorXd, 2> rhs = {cache.B0inv_beta0[0], cache.B0inv_beta0[1]};
    const double inv_s2[2] = {1.0 / st.params.sigma2[0], 1.0 / st.params.sigma2[1]};
    for (int i = 0; i < data.n(); ++i) {
      const int s = st.u[i] - 1;
      prec[s].noalias() += inv_s2[s] * data.X.row(i).transpose() * data.X.row(i);
      rhs[s].noalias() += (inv_s2[s] * st.z[i]) * data.X.row(i).transpose();
    }
    for (int s = 0; s < 2; ++s) {
      Eigen::LLT<MatrixXd> llt(prec[s]);
      if (llt.info() != Eigen::Success) throw NumericalError("step_beta: precision not SPD");
      VectorXd mean = llt.solve(rhs[s]);
      VectorXd zed(data.q());
      for (int k = 0; k < data.q(); ++k) zed[k] = chain.normal();
      // x = mean + U^{-1} z has covariance prec^{-1}.
      st.params.beta[s] = mean + llt.matrixU().solve(zed);
    }
  }

  void note_proposal_failure() {
    if (++proposal_failures == 1)
      warns.push_back("tailored proposal: mode search hit the iteration cap; covariance inflated");
  }

  void step_beta_delta(std::uint64_t) {
    for (int s = 1; s <= 2; ++s) {
      auto kernel = beta_delta_kernel(data, st.u, s, st.params.sigma2[s - 1], prior, cache);
      bool converged = true;
      TailoredProposal prop =
          proposal_from_kernel(kernel, data.q() + data.J - 3, cfg, &converged);
      if (!converged) note_proposal_failure();
      VectorXd cur(data.q() + data.J - 3);
      cur << st.params.beta[s - 1], st.params.cutpoints.delta[s - 1];
      VectorXd cand = prop.draw(chain);
      double log_ratio = (kernel(cand, nullptr) - kernel(cur, nullptr)) +
                         (prop.log_pdf(cur) - prop.log_pdf(cand));
      if (!std::isfinite(log_ratio)) log_ratio = -std::numeric_limits<double>::infinity();
      const bool accept = std::log(chain.uniform()) < std::min(0.0, log_ratio);
      bd_accepted[s - 1] = accept;
      if (accept) {
        st.params.beta[s - 1] = cand.head(data.q());
        st.params.cutpoints.delta[s - 1] = cand.tail(data.J - 3);
        st.params.cutpoints.gamma[s - 1] =
            model::cutpoints_from_delta(data.J, st.params.cutpoints.delta[s - 1]);
      }
    }
  }

  void step_sigma2() {
    for (int s = 1; s <= 2; ++s) {
      auto [shape, scale] =
          sigma2_posterior_params(data, st.z, st.u, s, st.params.beta[s - 1], prior);
      st.params.sigma2[s - 1] = chain.inv_gamma(shape, scale);
    }
  }

  void step_alpha_mh() {
    auto kernel = alpha_kernel_from_table(data, table, prior, cfg.exec);
    bool converged = true;
    TailoredProposal prop = proposal_from_kernel(kernel, data.p(), cfg, &converged);
    if (!converged) note_proposal_failure();
    MhResult mh = draw_alpha_mh(st.params.alpha, prop, kernel, chain);
    st.params.alpha = mh.value;
    alpha_accepted = mh.accepted;
  }

  void step_alpha_full() {
    VectorXd rhs = cache.A0inv_alpha0 + data.W.transpose() * st.l;
    VectorXd mean = alpha_full_llt.solve(rhs);
    VectorXd zed(data.p());
    for (int k = 0; k < data.p(); ++k) zed[k] = chain.normal();
    st.params.alpha = mean + alpha_full_llt.matrixU().solve(zed);
  }

  // Label-swap MH on the class-indexed blocks with the indicators and latent
  // outcomes collapsed out of the accept ratio; the u and z redraws that
  // follow in the same sweep restore the joint state, so nothing in between
  // may condition on the stale latents. Proposing the relabeled configuration
  // directly lets a reduced run hop between the two labelings of its
  // conditional in one step instead of waiting for the indicators to flip one
  // observation at a time.
  void step_label_swap(std::uint64_t t, bool swap_beta) {
    ParamDraw prop = st.params;
    std::swap(prop.sigma2[0], prop.sigma2[1]);
    if (swap_beta) {
      std::swap(prop.beta[0], prop.beta[1]);
      std::swap(prop.cutpoints.gamma[0], prop.cutpoints.gamma[1]);
      std::swap(prop.cutpoints.delta[0], prop.cutpoints.delta[1]);
    }
    // The sigma2 prior is shared between classes, so its terms cancel; the
    // coefficient and cut-point priors may differ per class.
    double log_ratio = model::log_likelihood(data, prop, cfg.exec) -
                       model::log_likelihood(data, st.params, cfg.exec);
    if (swap_beta) {
      for (int s = 0; s < 2; ++s) {
        log_ratio += math::mvn_log_pdf(prop.beta[s], prior.beta0[s], prior.B0[s]) -
                     math::mvn_log_pdf(st.params.beta[s], prior.beta0[s], prior.B0[s]);
        if (data.J > 3)
          log_ratio += math::mvn_log_pdf(prop.cutpoints.delta[s], prior.delta0[s], prior.D0[s]) -
                       math::mvn_log_pdf(st.params.cutpoints.delta[s], prior.delta0[s],
                                         prior.D0[s]);
      }
    }
    if (!std::isfinite(log_ratio)) log_ratio = -std::numeric_limits<double>::infinity();
    rng::Philox gen(seed, rng::obs_stream(rng::Purpose::kLabelSwap, t, 0));
    if (std::log(gen.uniform()) < std::min(0.0, log_ratio)) st.params = prop;
  }

  void step_l(std::uint64_t t) {
    kernels::draw_latent_class(cfg.exec, data, st.params.alpha, st.u.data(), seed, t,
                               st.l.data());
  }

  void step_u(std::uint64_t t) {
    kernels::draw_class_indicators(cfg.exec, data, st.params.alpha, table->p1.data(),
                                   table->p2.data(), seed, t, st.u.data());
  }

  void step_z(std::uint64_t t) {
    kernels::draw_latent_outcomes(cfg.exec, data, st.params.beta, st.params.sigma2,
                                  st.params.cutpoints, st.u.data(), seed, t, st.z.data());
  }
};

GibbsSweeper::GibbsSweeper(const Dataset& data, const PriorSpec& prior, const RunConfig& config,
                           std::uint64_t seed)
    : impl_(std::make_unique<Impl>(data, prior, config, seed)) {}

GibbsSweeper::~GibbsSweeper() = default;

void GibbsSweeper::init_default() {
  impl_->init_params();
  impl_->init_latents();
}

void GibbsSweeper::init_from(const ParamDraw& theta) {
  impl_->st.params = theta;
  impl_->refresh_latents_from_params();
}

void GibbsSweeper::sweep_collapsed(std::uint64_t t) {
  auto& im = *impl_;
  if (im.data.J > 3)
    im.step_beta_delta(t);
  else
    im.step_beta();
  im.step_sigma2();
  im.rebuild_table();
  im.step_alpha_mh();
  im.step_u(t);
  im.step_z(t);
}

void GibbsSweeper::sweep_full(std::uint64_t t) {
  auto& im = *impl_;
  if (im.data.J > 3)
    im.step_beta_delta(t);
  else
    im.step_beta();
  im.step_sigma2();
  // Refresh l under the current class labels before the conjugate alpha draw,
  // so no step conditions on a latent that predates the last u update.
  im.step_l(t);
  im.step_alpha_full();
  im.rebuild_table();
  im.step_u(t);
  im.step_z(t);
}

void GibbsSweeper::sweep_alpha_fixed(std::uint64_t t) {
  auto& im = *impl_;
  if (im.data.J > 3)
    im.step_beta_delta(t);
  else
    im.step_beta();
  im.step_sigma2();
  im.step_label_swap(t, true);
  im.rebuild_table();
  im.step_u(t);
  im.step_z(t);
}

void GibbsSweeper::sweep_alpha_beta_fixed(std::uint64_t t) {
  auto& im = *impl_;
  im.step_sigma2();
  im.step_label_swap(t, false);
  im.rebuild_table();
  im.step_u(t);
  im.step_z(t);
}

const model::ChainState& GibbsSweeper::state() const { return impl_->st; }
bool GibbsSweeper::last_alpha_accepted() const { return impl_->alpha_accepted; }
bool GibbsSweeper::last_beta_delta_accepted(int s) const { return impl_->bd_accepted[s - 1]; }
std::vector<std::string>& GibbsSweeper::warnings() { return impl_->warns; }

std::pair<VectorXd, MatrixXd> GibbsSweeper::beta_moments(int s) const {
  return beta_posterior_moments(impl_->data, impl_->st.z, impl_->st.u, s,
                                impl_->st.params.sigma2[s - 1], impl_->prior);
}

std::pair<double, double> GibbsSweeper::sigma2_params(int s) const {
  return sigma2_posterior_params(impl_->data, impl_->st.z, impl_->st.u, s,
                                 impl_->st.params.beta[s - 1], impl_->prior);
}

namespace {

PosteriorSample run_chain(const Dataset& data, const PriorSpec& prior, const RunConfig& config,
                          bool collapsed) {
  config.validate();
  auto data_warnings = data.validate();
  prior.validate(data.p(), data.q(), data.J);

  GibbsSweeper sweeper(data, prior, config, config.seed);
  sweeper.init_default();

  PosteriorSample out;
  out.J = data.J;
  out.warnings = data_warnings;
  out.draws.reserve(config.retained());
  if (config.store_u) out.u_draws.reserve(config.retained());

  long ac_alpha = 0;
  long ac_bd[2] = {0, 0};
  for (int t = 1; t <= config.n_iter; ++t) {
    if (collapsed)
      sweeper.sweep_collapsed(static_cast<std::uint64_t>(t));
    else
      sweeper.sweep_full(static_cast<std::uint64_t>(t));
    if (t <= config.burn_in) continue;
    const auto& st = sweeper.state();
    out.draws.push_back(st.params);
    if (config.store_u) {
      std::vector<std::int8_t> u(st.u.size());
      for (int i = 0; i < st.u.size(); ++i) u[i] = static_cast<std::int8_t>(st.u[i]);
      out.u_draws.push_back(std::move(u));
    }
    ac_alpha += sweeper.last_alpha_accepted() ? 1 : 0;
    for (int s = 1; s <= 2; ++s) ac_bd[s - 1] += sweeper.last_beta_delta_accepted(s) ? 1 : 0;
  }
  const double g = static_cast<double>(config.retained());
  out.accept_rate_alpha = collapsed ? ac_alpha / g : 1.0;
  if (data.J > 3)
    out.accept_rate_beta_delta = {ac_bd[0] / g, ac_bd[1] / g};
  out.warnings.insert(out.warnings.end(), sweeper.warnings().begin(), sweeper.warnings().end());
  return out;
}

}  // namespace

PosteriorSample run_collapsed_gibbs(const Dataset& data, const PriorSpec& prior,
                                    const RunConfig& config) {
  return run_chain(data, prior, config, true);
}

PosteriorSample run_full_gibbs(const Dataset& data, const PriorSpec& prior,
                               const RunConfig& config) {
  return run_chain(data, prior, config, false);
}

double relabel(PosteriorSample& sample) {
  long swaps = 0;
  for (std::size_t g = 0; g < sample.draws.size(); ++g) {
    auto& d = sample.draws[g];
    if (d.beta[0][0] >= d.beta[1][0]) continue;
    std::swap(d.beta[0], d.beta[1]);
    std::swap(d.sigma2[0], d.sigma2[1]);
    std::swap(d.cutpoints.gamma[0], d.cutpoints.gamma[1]);
    std::swap(d.cutpoints.delta[0], d.cutpoints.delta[1]);
    d.alpha = -d.alpha;
    if (g < sample.u_draws.size())
      for (auto& ui : sample.u_draws[g]) ui = static_cast<std::int8_t>(ui == 1 ? 2 : 1);
    ++swaps;
  }
  sample.relabeled = true;
  sample.swap_fraction =
      sample.draws.empty() ? 0.0 : static_cast<double>(swaps) / sample.draws.size();
  return sample.swap_fraction;
}

}  // namespace lcop::samplers
