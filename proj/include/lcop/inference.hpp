#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lcop/model.hpp"
#include "lcop/samplers.hpp"

namespace lcop::inference {

using model::Dataset;
using samplers::PosteriorSample;
using Eigen::VectorXd;

// Autocorrelation at lags 1..max_lag with the biased (1/n) normalization.
// Throws DomainError on a constant series.
VectorXd autocorrelation(const VectorXd& chain, int max_lag);

// Effective sample size via the initial-positive-sequence truncation of the
// autocorrelation time, capped at the chain length.
double effective_sample_size(const VectorXd& chain);

// Linear-interpolation sample quantile (the common "type 7" rule).
double quantile(VectorXd values, double p);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Equal-tailed interval at the given coverage.
Interval equal_tailed_interval(const VectorXd& values, double coverage);

struct ChainSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  Interval one_sd;  // equal-tailed, 68.27% coverage
  Interval two_sd;  // equal-tailed, 95.45% coverage
  double ess = 0.0;
  VectorXd acf;  // lags 1..acf_lags (shorter if the chain is short)
};

using NamedChain = std::pair<std::string, VectorXd>;

// Scalar chains for every model parameter in a posterior sample:
// alpha_k, beta1_k, beta2_k, sigma2_s, and for J > 3 also delta and the
// interior cut-points gamma (named by their mathematical index).
std::vector<NamedChain> flatten(const PosteriorSample& sample);

std::vector<ChainSummary> summarize(const std::vector<NamedChain>& chains, int acf_lags = 40);
std::vector<ChainSummary> summarize(const PosteriorSample& sample, int acf_lags = 40);

// Per-draw averages over the sample of observations of the class-conditional
// category probabilities: series[s-1][j-1][g] = (1/n) sum_i P(y_i = j | s, theta_g).
struct CategoryProbDraws {
  std::array<std::vector<VectorXd>, 2> series;
  std::array<std::vector<double>, 2> mean;
  int J = 3;
};
CategoryProbDraws average_category_probs(const PosteriorSample& sample, const Dataset& data,
                                         Exec exec = Exec::parallel);

// Posterior distribution of the average covariate effect: the change in each
// class-conditional category probability when X column `covariate` is shifted,
// averaged over observations. Continuous columns shift by `delta` (default:
// one sample standard deviation); columns taking only values {0, 1} compare
// the column set to 1 against set to 0. The intercept column is rejected.
struct CovariateEffectDraws {
  int covariate = 0;
  double delta = 0.0;  // 1.0 for a binary contrast
  bool binary = false;
  std::array<std::vector<VectorXd>, 2> series;  // series[s-1][j-1][g]
  std::array<std::vector<double>, 2> mean;
  int J = 3;
};
CovariateEffectDraws covariate_effect(const PosteriorSample& sample, const Dataset& data,
                                      int covariate, std::optional<double> delta = std::nullopt,
                                      Exec exec = Exec::parallel);

}  // namespace lcop::inference
