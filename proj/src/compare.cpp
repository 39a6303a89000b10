#include "lcop/compare.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "lcop/errors.hpp"
#include "lcop/math.hpp"

namespace lcop::compare {

namespace {

constexpr int kBatches = 20;

// Seed tags for the auxiliary chains, so no stream overlaps the main run.
enum : std::uint64_t {
  kTagAlphaReduced = 1,
  kTagBetaReduced = 2,
  kTagSigmaReduced = 3,
  kTagAlphaDagger = 4,
};

void check_inputs(const Dataset& data, const PosteriorSample& main_run) {
  if (data.J != 3)
    throw ContractError("marginal likelihood: only the three-category model is supported");
  if (main_run.draws.empty()) throw ContractError("marginal likelihood: empty main run");
  if (main_run.relabeled)
    throw ContractError("marginal likelihood: pass the raw (unrelabeled) main run");
  if (main_run.J != data.J || main_run.draws.front().alpha.size() != data.p() ||
      main_run.draws.front().beta[0].size() != data.q())
    throw ContractError("marginal likelihood: main run does not match the data");
}

// Reduced runs keep the retained length of the main run and take a fresh 10%
// burn-in to forget the theta* initialization.
RunConfig reduced_config(const RunConfig& config, std::uint64_t tag) {
  RunConfig rc = config;
  const int g = config.retained();
  rc.burn_in = (g + 9) / 10;
  rc.n_iter = g + rc.burn_in;
  rc.seed = rng::mix_seed(config.seed, tag);
  rc.store_u = false;
  return rc;
}

// Log acceptance probability of an independence move from `from` to `to`.
double log_accept(const optimize::ObjFn& kernel, const samplers::TailoredProposal& prop,
                  const VectorXd& from, const VectorXd& to) {
  double lr = (kernel(to, nullptr) - kernel(from, nullptr)) +
              (prop.log_pdf(from) - prop.log_pdf(to));
  if (!std::isfinite(lr)) lr = -std::numeric_limits<double>::infinity();
  return std::min(0.0, lr);
}

bool same_values(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         (a.size() == 0 || (a - b).cwiseAbs().maxCoeff() == 0.0);
}

// The prior treats the class labels exchangeably when swapping the classes
// leaves it unchanged; the sigma2 hyperparameters are shared by construction.
bool label_exchangeable_prior(const PriorSpec& prior) {
  return prior.alpha0.isZero(0.0) && same_values(prior.beta0[0], prior.beta0[1]) &&
         same_values(prior.B0[0], prior.B0[1]);
}

// log(0.5 exp(a) + 0.5 exp(b)) with -inf tolerated.
double log_mean_pair(double a, double b) {
  const double hi = std::max(a, b);
  if (!std::isfinite(hi)) return hi;
  return hi + std::log(0.5 * (std::exp(a - hi) + std::exp(b - hi)));
}

ParamDraw posterior_mean(const PosteriorSample& sample) {
  PosteriorSample copy = sample;
  copy.u_draws.clear();
  samplers::relabel(copy);
  ParamDraw mean = copy.draws.front();
  mean.alpha.setZero();
  mean.beta[0].setZero();
  mean.beta[1].setZero();
  mean.sigma2 = {0.0, 0.0};
  const double g = static_cast<double>(copy.draws.size());
  for (const auto& d : copy.draws) {
    mean.alpha += d.alpha;
    for (int s = 0; s < 2; ++s) {
      mean.beta[s] += d.beta[s];
      mean.sigma2[s] += d.sigma2[s];
    }
  }
  mean.alpha /= g;
  for (int s = 0; s < 2; ++s) {
    mean.beta[s] /= g;
    mean.sigma2[s] /= g;
  }
  // J == 3: cut-points are fixed at (0, 1) for both classes.
  mean.cutpoints = model::Cutpoints::fixed_default(3);
  return mean;
}

}  // namespace

OrdinateEstimate alpha_ordinate(const Dataset& data, const PriorSpec& prior,
                                const RunConfig& config, const PosteriorSample& main_run,
                                const VectorXd& alpha_star) {
  check_inputs(data, main_run);
  const int g_main = main_run.size();

  // Numerator: posterior average of accept(alpha_g -> alpha*) times the
  // tailored proposal density at alpha*, rebuilding the proposal at each
  // draw's conditioning values exactly as the sampler did. Under a label-
  // exchangeable prior the alpha marginal is exactly symmetric, so the
  // numerator is averaged over the orbit {alpha*, -alpha*}: the orbit sum is
  // invariant under relabeling a draw, which makes the estimate insensitive
  // to how the main run splits its time between the two labelings.
  const bool exchangeable = label_exchangeable_prior(prior);
  const VectorXd alpha_mirror = -alpha_star;
  std::vector<double> num;
  num.reserve(g_main);
  for (const auto& d : main_run.draws) {
    auto kernel =
        samplers::make_alpha_kernel(data, d.beta, d.sigma2, d.cutpoints, prior, config.exec);
    auto prop = samplers::build_tailored_proposal(data, d.beta, d.sigma2, d.cutpoints, prior,
                                                  config, nullptr);
    double term = log_accept(kernel, prop, d.alpha, alpha_star) + prop.log_pdf(alpha_star);
    if (exchangeable)
      term = log_mean_pair(
          term, log_accept(kernel, prop, d.alpha, alpha_mirror) + prop.log_pdf(alpha_mirror));
    num.push_back(term);
  }

  // Denominator: with alpha held at alpha*, average the acceptance probability
  // of leaving alpha* toward fresh proposal draws.
  RunConfig rc = reduced_config(config, kTagAlphaReduced);
  samplers::GibbsSweeper sweeper(data, prior, rc, rc.seed);
  ParamDraw start;
  start.alpha = alpha_star;
  start.beta = main_run.draws.back().beta;
  start.sigma2 = main_run.draws.back().sigma2;
  start.cutpoints = model::Cutpoints::fixed_default(3);
  sweeper.init_from(start);
  rng::Philox dagger(rng::mix_seed(config.seed, kTagAlphaDagger), rng::kChainStream);
  std::vector<double> den;
  den.reserve(rc.retained());
  for (int t = 1; t <= rc.n_iter; ++t) {
    sweeper.sweep_alpha_fixed(static_cast<std::uint64_t>(t));
    if (t <= rc.burn_in) continue;
    const auto& st = sweeper.state();
    auto kernel = samplers::make_alpha_kernel(data, st.params.beta, st.params.sigma2,
                                              st.params.cutpoints, prior, config.exec);
    auto prop = samplers::build_tailored_proposal(data, st.params.beta, st.params.sigma2,
                                                  st.params.cutpoints, prior, config, nullptr);
    VectorXd cand = prop.draw(dagger);
    den.push_back(log_accept(kernel, prop, alpha_star, cand));
  }

  auto ln = math::log_mean_exp_with_se(num, kBatches);
  auto ld = math::log_mean_exp_with_se(den, kBatches);
  return {ln.log_mean - ld.log_mean,
          std::sqrt(ln.se_log_mean * ln.se_log_mean + ld.se_log_mean * ld.se_log_mean)};
}

OrdinateEstimate beta_ordinate(const Dataset& data, const PriorSpec& prior,
                               const RunConfig& config, const ParamDraw& theta_star) {
  RunConfig rc = reduced_config(config, kTagBetaReduced);
  samplers::GibbsSweeper sweeper(data, prior, rc, rc.seed);
  sweeper.init_from(theta_star);
  std::vector<double> terms;
  terms.reserve(rc.retained());
  for (int t = 1; t <= rc.n_iter; ++t) {
    sweeper.sweep_alpha_fixed(static_cast<std::uint64_t>(t));
    if (t <= rc.burn_in) continue;
    double lp = 0.0;
    for (int s = 1; s <= 2; ++s) {
      auto [mean, cov] = sweeper.beta_moments(s);
      lp += math::mvn_log_pdf(theta_star.beta[s - 1], mean, cov);
    }
    terms.push_back(lp);
  }
  auto lm = math::log_mean_exp_with_se(terms, kBatches);
  return {lm.log_mean, lm.se_log_mean};
}

OrdinateEstimate sigma2_ordinate(const Dataset& data, const PriorSpec& prior,
                                 const RunConfig& config, const ParamDraw& theta_star) {
  RunConfig rc = reduced_config(config, kTagSigmaReduced);
  samplers::GibbsSweeper sweeper(data, prior, rc, rc.seed);
  sweeper.init_from(theta_star);
  std::vector<double> terms;
  terms.reserve(rc.retained());
  for (int t = 1; t <= rc.n_iter; ++t) {
    sweeper.sweep_alpha_beta_fixed(static_cast<std::uint64_t>(t));
    if (t <= rc.burn_in) continue;
    double lp = 0.0;
    for (int s = 1; s <= 2; ++s) {
      auto [shape, scale] = sweeper.sigma2_params(s);
      lp += math::inv_gamma_log_pdf(theta_star.sigma2[s - 1], shape, scale);
    }
    terms.push_back(lp);
  }
  auto lm = math::log_mean_exp_with_se(terms, kBatches);
  return {lm.log_mean, lm.se_log_mean};
}

double log_prior_density(const ParamDraw& theta, const PriorSpec& prior) {
  double lp = math::mvn_log_pdf(theta.alpha, prior.alpha0, prior.A0);
  for (int s = 0; s < 2; ++s) {
    lp += math::mvn_log_pdf(theta.beta[s], prior.beta0[s], prior.B0[s]);
    lp += math::inv_gamma_log_pdf(theta.sigma2[s], 0.5 * prior.v, 0.5 * prior.d);
  }
  return lp;
}

MarginalLikelihoodResult chib_marginal_likelihood(const Dataset& data, const PriorSpec& prior,
                                                  const RunConfig& config,
                                                  const PosteriorSample& main_run) {
  check_inputs(data, main_run);
  MarginalLikelihoodResult res;
  res.theta_star = posterior_mean(main_run);
  res.log_lik_at_star = model::log_likelihood(data, res.theta_star, config.exec);
  res.log_prior_at_star = log_prior_density(res.theta_star, prior);
  res.alpha_ordinate = alpha_ordinate(data, prior, config, main_run, res.theta_star.alpha);
  res.beta_ordinate = beta_ordinate(data, prior, config, res.theta_star);
  res.sigma2_ordinate = sigma2_ordinate(data, prior, config, res.theta_star);
  res.log_marginal = res.log_lik_at_star + res.log_prior_at_star -
                     res.alpha_ordinate.log_value - res.beta_ordinate.log_value -
                     res.sigma2_ordinate.log_value;
  res.mc_se = std::sqrt(res.alpha_ordinate.mc_se * res.alpha_ordinate.mc_se +
                        res.beta_ordinate.mc_se * res.beta_ordinate.mc_se +
                        res.sigma2_ordinate.mc_se * res.sigma2_ordinate.mc_se);
  return res;
}

MarginalLikelihoodResult chib_marginal_likelihood(const Dataset& data, const PriorSpec& prior,
                                                  const RunConfig& config) {
  if (data.J != 3)
    throw ContractError("marginal likelihood: only the three-category model is supported");
  RunConfig main_cfg = config;
  main_cfg.store_u = false;
  PosteriorSample main_run = samplers::run_collapsed_gibbs(data, prior, main_cfg);
  return chib_marginal_likelihood(data, prior, config, main_run);
}

}  // namespace lcop::compare
