#include <array>
#include <cmath>

#include "doctest.h"
#include "lcop/errors.hpp"
#include "lcop/model.hpp"
#include "lcop/sim.hpp"
#include "oracles.hpp"

using namespace lcop;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;

TEST_CASE("builtin generator settings carry the documented parameters") {
  for (int setting : {1, 2}) {
    const auto spec = sim::builtin_setting(setting);
    CHECK(spec.n == 1200);
    CHECK(spec.J == 3);
    REQUIRE(spec.alpha_true.size() == 2);
    CHECK(spec.alpha_true[0] == -0.3);
    CHECK(spec.alpha_true[1] == 1.5);
    CHECK(spec.sigma2_true[0] == 0.25);
    CHECK(spec.sigma2_true[1] == 0.25);
    REQUIRE(spec.x_means.size() == 3);
    CHECK(spec.x_means[0] == 0.5);
    CHECK(spec.x_means[2] == 0.0);
    CHECK(spec.x_vars[2] == 0.8);
    CHECK_NOTHROW(spec.validate());
  }
  const auto s1 = sim::builtin_setting(1);
  CHECK(s1.beta_true[0][1] == -0.7);
  CHECK(s1.beta_true[1][3] == 0.8);
  const auto s2 = sim::builtin_setting(2);
  CHECK(s2.beta_true[0][1] == -0.6);
  CHECK(s2.beta_true[1][1] == -0.1);
  CHECK_THROWS_AS(sim::builtin_setting(0), ContractError);
  CHECK_THROWS_AS(sim::builtin_setting(3), ContractError);
}

TEST_CASE("generation is reproducible bit for bit and seed-sensitive") {
  const auto spec = sim::builtin_setting(1);
  const auto a = sim::generate(spec, 42);
  const auto b = sim::generate(spec, 42);
  CHECK((a.data.y.array() == b.data.y.array()).all());
  CHECK((a.data.X.array() == b.data.X.array()).all());
  CHECK((a.data.W.array() == b.data.W.array()).all());
  CHECK((a.z_true.array() == b.z_true.array()).all());
  CHECK((a.l_true.array() == b.l_true.array()).all());
  CHECK((a.s_true.array() == b.s_true.array()).all());
  const auto c = sim::generate(spec, 43);
  CHECK(!(a.data.X.array() == c.data.X.array()).all());
  CHECK(!(a.z_true.array() == c.z_true.array()).all());
}

TEST_CASE("internal consistency of every generated record") {
  auto spec = sim::builtin_setting(1);
  spec.n = 2000;
  const auto out = sim::generate(spec, 7);
  const auto& d = out.data;
  REQUIRE(d.n() == 2000);
  CHECK(d.validate().empty());
  CHECK(out.class_count[0] + out.class_count[1] == d.n());
  std::array<long double, 2> mean_acc = {0.0L, 0.0L};
  std::array<int, 2> cnt = {0, 0};
  for (int i = 0; i < d.n(); ++i) {
    // Class label is the sign of the latent class utility.
    CHECK(out.s_true[i] == (out.l_true[i] > 0.0 ? 2 : 1));
    // The observed category is the band of the latent outcome under the
    // class-specific cut-points.
    const int s = out.s_true[i];
    const auto& gamma = spec.cutpoints.gamma[s - 1];
    int cat = d.J;
    for (int k = 0; k < gamma.size(); ++k) cat -= out.z_true[i] > gamma[k] ? 1 : 0;
    CHECK(d.y[i] == cat);
    // Latent outcome sits at the linear predictor plus noise; verify the
    // component accounting via the class-conditional means.
    const double xb = d.X.row(i).dot(spec.beta_true[s - 1]);
    mean_acc[s - 1] += xb;
    ++cnt[s - 1];
    CHECK(d.X(i, 0) == 1.0);
    CHECK(d.W(i, 0) == 1.0);
  }
  for (int s = 0; s < 2; ++s) {
    CHECK(cnt[s] == out.class_count[s]);
    CHECK(out.class_cond_mean[s] ==
          doctest::Approx(static_cast<double>(mean_acc[s] / cnt[s])).epsilon(1e-12));
  }
}

TEST_CASE("long-run frequencies match the analytic distribution of each setting") {
  for (int setting : {1, 2}) {
    const auto dist = oracle::setting_distribution(setting);
    auto spec = sim::builtin_setting(setting);
    spec.n = 40000;
    const auto out = sim::generate(spec, 101 + setting);

    // Class shares against the probit-mixture weight.
    const double share2 = static_cast<double>(out.class_count[1]) / spec.n;
    CHECK(share2 == doctest::Approx(dist.p_class2).epsilon(0.03));

    // Marginal category frequencies.
    std::array<double, 3> freq = {0, 0, 0};
    for (int i = 0; i < spec.n; ++i) freq[out.data.y[i] - 1] += 1.0;
    for (auto& f : freq) f /= spec.n;
    for (int j = 0; j < 3; ++j) {
      CAPTURE(setting);
      CAPTURE(j);
      CHECK(freq[j] == doctest::Approx(dist.p_marginal[j]).epsilon(0.05));
    }

    // Class-conditional category frequencies.
    std::array<std::array<double, 3>, 2> cfreq = {{{0, 0, 0}, {0, 0, 0}}};
    for (int i = 0; i < spec.n; ++i) cfreq[out.s_true[i] - 1][out.data.y[i] - 1] += 1.0;
    for (int s = 0; s < 2; ++s)
      for (int j = 0; j < 3; ++j) {
        cfreq[s][j] /= out.class_count[s];
        const auto& ref = s == 0 ? dist.p_given_class1 : dist.p_given_class2;
        CHECK(cfreq[s][j] == doctest::Approx(ref[j]).epsilon(0.06));
      }

    // Because the class layer is independent of X, the class-conditional mean
    // of the linear predictor matches the unconditional one.
    for (int s = 0; s < 2; ++s)
      CHECK(out.class_cond_mean[s] == doctest::Approx(dist.mean_xb[s]).epsilon(0.08));
  }
}

TEST_CASE("the two settings differ exactly in how far the class means separate") {
  const auto d1 = oracle::setting_distribution(1);
  const auto d2 = oracle::setting_distribution(2);
  // Setting 1 separates the class-conditional means; setting 2 overlaps them.
  CHECK(std::abs(d1.mean_xb[0] - d1.mean_xb[1]) > 0.4);
  CHECK(std::abs(d2.mean_xb[0] - d2.mean_xb[1]) < 0.2);
  // Shared class layer.
  CHECK(d1.p_class2 == d2.p_class2);
}

TEST_CASE("four-category generation respects custom cut-points") {
  auto spec = sim::builtin_setting(1);
  spec.J = 4;
  spec.n = 800;
  const VectorXd delta = (VectorXd(1) << 0.4).finished();
  spec.cutpoints = model::Cutpoints::from_delta(4, {delta, delta});
  const auto out = sim::generate(spec, 5);
  std::array<int, 4> counts = {0, 0, 0, 0};
  for (int i = 0; i < spec.n; ++i) {
    REQUIRE(out.data.y[i] >= 1);
    REQUIRE(out.data.y[i] <= 4);
    ++counts[out.data.y[i] - 1];
    const auto& gamma = spec.cutpoints.gamma[out.s_true[i] - 1];
    int cat = 4;
    for (int k = 0; k < gamma.size(); ++k) cat -= out.z_true[i] > gamma[k] ? 1 : 0;
    CHECK(out.data.y[i] == cat);
  }
  for (int j = 0; j < 4; ++j) CHECK(counts[j] > 0);
}

TEST_CASE("specification validation rejects inconsistent generators") {
  auto spec = sim::builtin_setting(1);
  spec.n = 0;
  CHECK_THROWS_AS(spec.validate(), ContractError);
  spec = sim::builtin_setting(1);
  spec.sigma2_true[1] = -0.1;
  CHECK_THROWS_AS(spec.validate(), DomainError);
  spec = sim::builtin_setting(1);
  spec.x_vars[0] = 0.0;
  CHECK_THROWS_AS(spec.validate(), DomainError);
  spec = sim::builtin_setting(1);
  spec.x_means = VectorXd::Zero(2);  // must cover q - 1 = 3 columns
  CHECK_THROWS_AS(spec.validate(), ContractError);
  spec = sim::builtin_setting(1);
  spec.beta_true[1] = VectorXd::Zero(3);
  CHECK_THROWS_AS(spec.validate(), ContractError);
  spec = sim::builtin_setting(1);
  spec.J = 4;  // cut-points still sized for three categories
  CHECK_THROWS_AS(spec.validate(), ContractError);
}
