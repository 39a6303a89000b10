#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lcop/model.hpp"
#include "lcop/optimize.hpp"
#include "lcop/rng.hpp"

namespace lcop::samplers {

using model::Cutpoints;
using model::Dataset;
using model::ParamDraw;
using model::PriorSpec;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;

struct RunConfig {
  int n_iter = 11000;
  int burn_in = 1000;
  std::uint64_t seed = 1;
  double proposal_dof = 10.0;  // must exceed 2 so the proposal has a covariance
  int optimizer_max_iter = 200;
  double optimizer_grad_tol = 1e-6;
  bool store_u = true;
  Exec exec = Exec::parallel;

  int retained() const { return n_iter - burn_in; }
  void validate() const;
};

// Student-t proposal tailored to a conditional posterior: located at the mode
// with covariance from the inverted negative Hessian there.
struct TailoredProposal {
  VectorXd mode;
  MatrixXd cov;  // SPD; eigenvalues floored at 1e-10, inflated 4x on non-convergence
  double dof = 10.0;
  bool converged = true;

  VectorXd draw(rng::Philox& gen) const;
  double log_pdf(const VectorXd& x) const;

 private:
  mutable MatrixXd chol_;  // lazily cached lower factor
  const MatrixXd& chol() const;
};

struct PosteriorSample {
  std::vector<ParamDraw> draws;               // retained draws, length G
  std::vector<std::vector<std::int8_t>> u_draws;  // optional G x n class indicators
  double accept_rate_alpha = 1.0;             // post-burn-in MH acceptance
  std::array<double, 2> accept_rate_beta_delta = {1.0, 1.0};  // J > 3 joint block
  bool relabeled = false;
  double swap_fraction = 0.0;
  int J = 3;
  std::vector<std::string> warnings;

  int size() const { return static_cast<int>(draws.size()); }
};

// Conditional moments of the conjugate blocks, exposed for tests and for the
// Rao-Blackwellized marginal-likelihood ordinates. Class index s is 1 or 2.
std::pair<VectorXd, MatrixXd> beta_posterior_moments(const Dataset& data, const VectorXd& z,
                                                     const VectorXi& u, int s, double sigma2,
                                                     const PriorSpec& prior);
std::pair<double, double> sigma2_posterior_params(const Dataset& data, const VectorXd& z,
                                                  const VectorXi& u, int s, const VectorXd& beta_s,
                                                  const PriorSpec& prior);
// Conjugate update for the class-membership coefficients given latent class
// utilities l (unit variance probit layer).
std::pair<VectorXd, MatrixXd> alpha_conditional_moments(const Dataset& data, const VectorXd& l,
                                                        const PriorSpec& prior);

// One Gibbs draw per conjugate block.
std::array<VectorXd, 2> draw_beta(const Dataset& data, const VectorXd& z, const VectorXi& u,
                                  const std::array<double, 2>& sigma2, const PriorSpec& prior,
                                  rng::Philox& gen);
std::array<double, 2> draw_sigma2(const Dataset& data, const VectorXd& z, const VectorXi& u,
                                  const std::array<VectorXd, 2>& beta, const PriorSpec& prior,
                                  rng::Philox& gen);

// Per-observation draws; sweep tags the substream so repeated calls with the
// same (seed, sweep) reproduce identical vectors on any lane.
VectorXi draw_class_indicators(const Dataset& data, const VectorXd& alpha,
                               const std::array<VectorXd, 2>& beta,
                               const std::array<double, 2>& sigma2, const Cutpoints& cutpoints,
                               std::uint64_t seed, std::uint64_t sweep, Exec exec);
VectorXd draw_latent_z(const Dataset& data, const std::array<VectorXd, 2>& beta,
                       const std::array<double, 2>& sigma2, const Cutpoints& cutpoints,
                       const VectorXi& u, std::uint64_t seed, std::uint64_t sweep, Exec exec);

// Log target for the class-membership block (data part plus Normal prior),
// with an analytic gradient. Captures the class-conditional table.
optimize::ObjFn make_alpha_kernel(const Dataset& data, const std::array<VectorXd, 2>& beta,
                                  const std::array<double, 2>& sigma2, const Cutpoints& cutpoints,
                                  const PriorSpec& prior, Exec exec);

// Proposal tailored to the current conditional posterior of alpha; mode found
// by BFGS restarted from the zero vector. Appends a note to warnings (when
// given) if the mode search hits the iteration cap.
TailoredProposal build_tailored_proposal(const Dataset& data, const std::array<VectorXd, 2>& beta,
                                         const std::array<double, 2>& sigma2,
                                         const Cutpoints& cutpoints, const PriorSpec& prior,
                                         const RunConfig& config,
                                         std::vector<std::string>* warnings = nullptr);

struct MhResult {
  VectorXd value;
  bool accepted = false;
};

// Independence Metropolis-Hastings step with a tailored t proposal.
MhResult draw_alpha_mh(const VectorXd& current, const TailoredProposal& proposal,
                       const optimize::ObjFn& kernel, rng::Philox& gen);

// Joint tailored-t update of (beta_s, delta_s) for J > 3, marginally of z on
// the class-s observations. Throws ContractError when J == 3.
struct BetaDeltaResult {
  VectorXd beta;
  VectorXd delta;
  bool accepted = false;
};
BetaDeltaResult draw_beta_delta_joint(const Dataset& data, const VectorXi& u, int s,
                                      const VectorXd& beta_s, const VectorXd& delta_s,
                                      double sigma2_s, const PriorSpec& prior,
                                      const RunConfig& config, rng::Philox& gen,
                                      std::vector<std::string>* warnings = nullptr);

// Samplers. Both target the same posterior; the collapsed variant updates
// alpha marginally of the latent class utilities via tailored MH, the full
// variant augments with l and uses the conjugate normal draw.
PosteriorSample run_collapsed_gibbs(const Dataset& data, const PriorSpec& prior,
                                    const RunConfig& config);
PosteriorSample run_full_gibbs(const Dataset& data, const PriorSpec& prior,
                               const RunConfig& config);

// Identification constraint: orders classes by the outcome intercept so that
// beta_1 intercept >= beta_2 intercept in every draw, swapping class labels
// (and negating alpha, flipping stored class indicators) where needed.
// Returns the fraction of draws swapped.
double relabel(PosteriorSample& sample);

// Internal sweep engine, exposed for the marginal-likelihood reduced runs.
class GibbsSweeper {
 public:
  GibbsSweeper(const Dataset& data, const PriorSpec& prior, const RunConfig& config,
               std::uint64_t seed);
  ~GibbsSweeper();
  GibbsSweeper(const GibbsSweeper&) = delete;
  GibbsSweeper& operator=(const GibbsSweeper&) = delete;

  void init_default();
  // Start from given parameters and refresh (u, z) from their conditionals.
  void init_from(const ParamDraw& theta);

  void sweep_collapsed(std::uint64_t t);
  void sweep_full(std::uint64_t t);
  void sweep_alpha_fixed(std::uint64_t t);        // beta, sigma2, u, z
  void sweep_alpha_beta_fixed(std::uint64_t t);   // sigma2, u, z

  const model::ChainState& state() const;
  bool last_alpha_accepted() const;
  bool last_beta_delta_accepted(int s) const;
  std::vector<std::string>& warnings();

  std::pair<VectorXd, MatrixXd> beta_moments(int s) const;
  std::pair<double, double> sigma2_params(int s) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace lcop::samplers
