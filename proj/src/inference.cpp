#include "lcop/inference.hpp"

#include <algorithm>
#include <cmath>

#include "lcop/errors.hpp"
#include "lcop/exec.hpp"
#include "lcop/math.hpp"

namespace lcop::inference {

namespace {

// Centered series and its lag-0 autocovariance (biased normalization).
std::pair<VectorXd, double> center(const VectorXd& chain) {
  const int n = static_cast<int>(chain.size());
  if (n < 2) throw ContractError("autocorrelation: need at least two draws");
  VectorXd c = chain.array() - chain.mean();
  const double c0 = c.squaredNorm() / n;
  if (!(c0 > 0.0)) throw DomainError("autocorrelation: series is constant");
  return {std::move(c), c0};
}

double lag_corr(const VectorXd& c, double c0, int k) {
  const int n = static_cast<int>(c.size());
  double s = 0.0;
  for (int i = 0; i + k < n; ++i) s += c[i] * c[i + k];
  return s / (n * c0);
}

}  // namespace

VectorXd autocorrelation(const VectorXd& chain, int max_lag) {
  const int n = static_cast<int>(chain.size());
  if (max_lag < 1 || max_lag >= n)
    throw ContractError("autocorrelation: need 1 <= max_lag < chain length");
  auto [c, c0] = center(chain);
  VectorXd r(max_lag);
  for (int k = 1; k <= max_lag; ++k) r[k - 1] = lag_corr(c, c0, k);
  return r;
}

double effective_sample_size(const VectorXd& chain) {
  const int n = static_cast<int>(chain.size());
  auto [c, c0] = center(chain);
  // Sum successive pairs of autocorrelations while they stay positive
  // (adjacent-pair sums of a reversible chain's ACF are positive in theory,
  // so the first nonpositive pair marks the noise floor).
  double tau = -1.0;
  for (int m = 0; 2 * m + 1 < n; ++m) {
    const double pair = (m == 0 ? 1.0 : lag_corr(c, c0, 2 * m)) + lag_corr(c, c0, 2 * m + 1);
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  if (!(tau > 0.0)) return static_cast<double>(n);
  return std::min(static_cast<double>(n), n / tau);
}

double quantile(VectorXd values, double p) {
  const int n = static_cast<int>(values.size());
  if (n < 1) throw ContractError("quantile: empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw ContractError("quantile: p outside [0, 1]");
  std::sort(values.data(), values.data() + n);
  const double h = (n - 1) * p;
  const int lo = static_cast<int>(std::floor(h));
  if (lo >= n - 1) return values[n - 1];
  return values[lo] + (h - lo) * (values[lo + 1] - values[lo]);
}

Interval equal_tailed_interval(const VectorXd& values, double coverage) {
  if (!(coverage > 0.0 && coverage < 1.0))
    throw ContractError("equal_tailed_interval: coverage outside (0, 1)");
  const double tail = 0.5 * (1.0 - coverage);
  VectorXd sorted = values;
  std::sort(sorted.data(), sorted.data() + sorted.size());
  const int n = static_cast<int>(sorted.size());
  auto at = [&](double p) {
    const double h = (n - 1) * p;
    const int lo = static_cast<int>(std::floor(h));
    if (lo >= n - 1) return sorted[n - 1];
    return sorted[lo] + (h - lo) * (sorted[lo + 1] - sorted[lo]);
  };
  return {at(tail), at(1.0 - tail)};
}

std::vector<NamedChain> flatten(const PosteriorSample& sample) {
  if (sample.draws.empty()) throw ContractError("flatten: posterior sample is empty");
  const int G = sample.size();
  const auto& first = sample.draws.front();
  const int p = static_cast<int>(first.alpha.size());
  const int q = static_cast<int>(first.beta[0].size());
  const int J = sample.J;

  std::vector<NamedChain> chains;
  auto add = [&](const std::string& name, auto&& get) {
    VectorXd v(G);
    for (int g = 0; g < G; ++g) v[g] = get(sample.draws[g]);
    chains.emplace_back(name, std::move(v));
  };
  for (int k = 0; k < p; ++k)
    add("alpha_" + std::to_string(k + 1), [k](const auto& d) { return d.alpha[k]; });
  for (int s = 0; s < 2; ++s)
    for (int k = 0; k < q; ++k)
      add("beta" + std::to_string(s + 1) + "_" + std::to_string(k + 1),
          [s, k](const auto& d) { return d.beta[s][k]; });
  for (int s = 0; s < 2; ++s)
    add("sigma2_" + std::to_string(s + 1), [s](const auto& d) { return d.sigma2[s]; });
  if (J > 3) {
    for (int s = 0; s < 2; ++s)
      for (int k = 0; k < J - 3; ++k)
        add("delta" + std::to_string(s + 1) + "_" + std::to_string(k + 1),
            [s, k](const auto& d) { return d.cutpoints.delta[s][k]; });
    // Interior cut-points gamma_2 .. gamma_{J-2} (array slots 1 .. J-3).
    for (int s = 0; s < 2; ++s)
      for (int k = 1; k <= J - 3; ++k)
        add("gamma" + std::to_string(s + 1) + "_" + std::to_string(k + 1),
            [s, k](const auto& d) { return d.cutpoints.gamma[s][k]; });
  }
  return chains;
}

std::vector<ChainSummary> summarize(const std::vector<NamedChain>& chains, int acf_lags) {
  if (acf_lags < 1) throw ContractError("summarize: acf_lags must be positive");
  std::vector<ChainSummary> out;
  out.reserve(chains.size());
  for (const auto& [name, v] : chains) {
    const int n = static_cast<int>(v.size());
    if (n < 2) throw ContractError("summarize: chain '" + name + "' has fewer than two draws");
    ChainSummary s;
    s.name = name;
    s.mean = v.mean();
    s.sd = std::sqrt((v.array() - s.mean).square().sum() / (n - 1));
    // Coverages of one and two standard normal deviations.
    const double cov1 = math::norm_cdf(1.0) - math::norm_cdf(-1.0);
    const double cov2 = math::norm_cdf(2.0) - math::norm_cdf(-2.0);
    s.one_sd = equal_tailed_interval(v, cov1);
    s.two_sd = equal_tailed_interval(v, cov2);
    s.ess = effective_sample_size(v);
    s.acf = autocorrelation(v, std::min(acf_lags, n - 1));
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<ChainSummary> summarize(const PosteriorSample& sample, int acf_lags) {
  if (sample.size() < 100)
    throw ContractError("summarize: need at least 100 retained draws");
  return summarize(flatten(sample), acf_lags);
}

namespace {

void check_sample_against_data(const PosteriorSample& sample, const Dataset& data) {
  if (sample.draws.empty()) throw ContractError("posterior sample is empty");
  const auto& d = sample.draws.front();
  if (d.beta[0].size() != data.q() || d.alpha.size() != data.p())
    throw ContractError("posterior sample does not match the data dimensions");
  if (sample.J != data.J) throw ContractError("posterior sample does not match J");
}

}  // namespace

CategoryProbDraws average_category_probs(const PosteriorSample& sample, const Dataset& data,
                                         Exec exec) {
  check_sample_against_data(sample, data);
  const int G = sample.size();
  const int J = data.J;
  const int n = data.n();
  CategoryProbDraws out;
  out.J = J;
  for (int s = 0; s < 2; ++s) {
    out.series[s].assign(J, VectorXd(G));
    out.mean[s].assign(J, 0.0);
  }
  lcop::parallel_for(exec, G, [&](std::int64_t g) {
    const auto& th = sample.draws[g];
    std::array<VectorXd, 2> acc = {VectorXd::Zero(J), VectorXd::Zero(J)};
    for (int s = 0; s < 2; ++s) {
      const VectorXd xb = data.X * th.beta[s];
      for (int i = 0; i < n; ++i)
        acc[s] += model::ordinal_probs_at(xb[i], th.sigma2[s], th.cutpoints.gamma[s]);
    }
    for (int s = 0; s < 2; ++s)
      for (int j = 0; j < J; ++j) out.series[s][j][g] = acc[s][j] / n;
  });
  for (int s = 0; s < 2; ++s)
    for (int j = 0; j < J; ++j) out.mean[s][j] = out.series[s][j].mean();
  return out;
}

CovariateEffectDraws covariate_effect(const PosteriorSample& sample, const Dataset& data,
                                      int covariate, std::optional<double> delta, Exec exec) {
  check_sample_against_data(sample, data);
  if (covariate < 1 || covariate >= data.q())
    throw ContractError("covariate_effect: column index outside 1 .. q-1 (0 is the intercept)");
  const int G = sample.size();
  const int J = data.J;
  const int n = data.n();

  const VectorXd col = data.X.col(covariate);
  const bool binary = ((col.array() == 0.0) || (col.array() == 1.0)).all();
  double shift = 1.0;
  if (!binary) {
    if (delta) {
      shift = *delta;
      if (!(std::isfinite(shift)) || shift == 0.0)
        throw ContractError("covariate_effect: delta must be finite and nonzero");
    } else {
      const double m = col.mean();
      shift = std::sqrt((col.array() - m).square().sum() / (n - 1));
      if (!(shift > 0.0)) throw DomainError("covariate_effect: column has zero variance");
    }
  } else if (delta) {
    throw ContractError("covariate_effect: delta does not apply to a binary column");
  }

  CovariateEffectDraws out;
  out.covariate = covariate;
  out.delta = binary ? 1.0 : shift;
  out.binary = binary;
  out.J = J;
  for (int s = 0; s < 2; ++s) {
    out.series[s].assign(J, VectorXd(G));
    out.mean[s].assign(J, 0.0);
  }
  lcop::parallel_for(exec, G, [&](std::int64_t g) {
    const auto& th = sample.draws[g];
    std::array<VectorXd, 2> acc = {VectorXd::Zero(J), VectorXd::Zero(J)};
    for (int s = 0; s < 2; ++s) {
      const double bk = th.beta[s][covariate];
      const VectorXd xb = data.X * th.beta[s];
      for (int i = 0; i < n; ++i) {
        double base, shifted;
        if (binary) {
          base = xb[i] - col[i] * bk;  // column forced to 0
          shifted = base + bk;         // column forced to 1
        } else {
          base = xb[i];
          shifted = xb[i] + shift * bk;
        }
        acc[s] += model::ordinal_probs_at(shifted, th.sigma2[s], th.cutpoints.gamma[s]) -
                  model::ordinal_probs_at(base, th.sigma2[s], th.cutpoints.gamma[s]);
      }
    }
    for (int s = 0; s < 2; ++s)
      for (int j = 0; j < J; ++j) out.series[s][j][g] = acc[s][j] / n;
  });
  for (int s = 0; s < 2; ++s)
    for (int j = 0; j < J; ++j) out.mean[s][j] = out.series[s][j].mean();
  return out;
}

}  // namespace lcop::inference
