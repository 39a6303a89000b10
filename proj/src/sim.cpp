#include "lcop/sim.hpp"

#include <cmath>

#include "lcop/errors.hpp"
#include "lcop/rng.hpp"

namespace lcop::sim {

void SimSpec::validate() const {
  if (n < 1) throw ContractError("sim: n must be positive");
  if (J < 3) throw ContractError("sim: need at least three categories");
  if (alpha_true.size() < 1) throw ContractError("sim: alpha_true is empty");
  if (beta_true[0].size() < 1 || beta_true[0].size() != beta_true[1].size())
    throw ContractError("sim: beta_true vectors must be nonempty and the same length");
  const auto k = beta_true[0].size() - 1;
  if (x_means.size() != k || x_vars.size() != k)
    throw ContractError("sim: x_means/x_vars must cover the non-intercept X columns");
  for (int j = 0; j < k; ++j)
    if (!(x_vars[j] > 0.0)) throw DomainError("sim: x_vars must be positive");
  for (int s = 0; s < 2; ++s) {
    if (!(sigma2_true[s] > 0.0)) throw DomainError("sim: sigma2_true must be positive");
    if (cutpoints.gamma[s].size() != J - 1)
      throw ContractError("sim: cutpoints do not match J");
  }
  if (!alpha_true.allFinite() || !beta_true[0].allFinite() || !beta_true[1].allFinite() ||
      !x_means.allFinite())
    throw DomainError("sim: parameters must be finite");
}

SimSpec builtin_setting(int setting) {
  if (setting != 1 && setting != 2) throw ContractError("sim: setting must be 1 or 2");
  SimSpec spec;
  spec.n = 1200;
  spec.J = 3;
  spec.alpha_true = (Eigen::VectorXd(2) << -0.3, 1.5).finished();
  spec.sigma2_true = {0.25, 0.25};
  if (setting == 1) {
    spec.beta_true[0] = (Eigen::VectorXd(4) << 0.6, -0.7, -0.6, 0.5).finished();
    spec.beta_true[1] = (Eigen::VectorXd(4) << 0.1, 0.6, 0.2, 0.8).finished();
  } else {
    spec.beta_true[0] = (Eigen::VectorXd(4) << 0.6, -0.6, -0.6, 0.5).finished();
    spec.beta_true[1] = (Eigen::VectorXd(4) << 0.1, -0.1, -0.1, 0.8).finished();
  }
  spec.x_means = (Eigen::VectorXd(3) << 0.5, 0.5, 0.0).finished();
  spec.x_vars = (Eigen::VectorXd(3) << 1.0, 1.0, 0.8).finished();
  spec.cutpoints = Cutpoints::fixed_default(3);
  return spec;
}

SimOutput generate(const SimSpec& spec, std::uint64_t seed) {
  spec.validate();
  const int n = spec.n;
  const int p = static_cast<int>(spec.alpha_true.size());
  const int q = static_cast<int>(spec.beta_true[0].size());
  const int J = spec.J;

  SimOutput out;
  out.data.J = J;
  out.data.W = Eigen::MatrixXd::Ones(n, p);
  out.data.X = Eigen::MatrixXd::Ones(n, q);
  out.data.y.resize(n);
  out.s_true.resize(n);
  out.z_true.resize(n);
  out.l_true.resize(n);

  rng::Philox gen(seed, 0);
  std::array<double, 2> sum_xb = {0.0, 0.0};
  for (int i = 0; i < n; ++i) {
    for (int j = 1; j < p; ++j) out.data.W(i, j) = gen.normal();
    for (int j = 1; j < q; ++j)
      out.data.X(i, j) = spec.x_means[j - 1] + std::sqrt(spec.x_vars[j - 1]) * gen.normal();
    const double l = out.data.W.row(i).dot(spec.alpha_true) + gen.normal();
    const int s = l <= 0.0 ? 1 : 2;
    const double xb = out.data.X.row(i).dot(spec.beta_true[s - 1]);
    const double z = xb + std::sqrt(spec.sigma2_true[s - 1]) * gen.normal();
    const VectorXd& gamma = spec.cutpoints.gamma[s - 1];
    int above = 0;  // number of cut-points strictly below z
    for (int k = 0; k < J - 1; ++k)
      if (z > gamma[k]) ++above;
    out.l_true[i] = l;
    out.s_true[i] = s;
    out.z_true[i] = z;
    out.data.y[i] = J - above;
    sum_xb[s - 1] += xb;
    ++out.class_count[s - 1];
  }
  for (int s = 0; s < 2; ++s)
    out.class_cond_mean[s] = out.class_count[s] > 0 ? sum_xb[s] / out.class_count[s] : 0.0;
  return out;
}

}  // namespace lcop::sim
