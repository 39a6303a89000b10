#pragma once

#include <array>
#include <cstdint>

#include "lcop/model.hpp"

namespace lcop::sim {

using model::Cutpoints;
using model::Dataset;
using Eigen::VectorXd;
using Eigen::VectorXi;

// Generator settings. W is an intercept plus standard normal columns; the
// non-intercept X columns are independent normals with the given moments.
struct SimSpec {
  int n = 1200;
  VectorXd alpha_true;
  std::array<VectorXd, 2> beta_true;
  std::array<double, 2> sigma2_true = {0.25, 0.25};
  VectorXd x_means;
  VectorXd x_vars;
  int J = 3;
  Cutpoints cutpoints;  // class-specific bands; defaults to the fixed (0, 1) pair

  void validate() const;
};

struct SimOutput {
  Dataset data;
  VectorXi s_true;  // class labels, 1 or 2
  VectorXd z_true;  // latent outcomes
  VectorXd l_true;  // latent class utilities
  std::array<double, 2> class_cond_mean = {0.0, 0.0};  // mean of x'beta_s within class s
  std::array<int, 2> class_count = {0, 0};
};

// The two benchmark generator settings (n = 1200, J = 3). They share the
// class layer and noise scales and differ in the outcome coefficients:
// setting 1 separates the classes, setting 2 makes them overlap.
SimSpec builtin_setting(int setting);

// Draws everything from one sequential counter-based stream, so a (spec, seed)
// pair reproduces the dataset bit for bit. Per observation the draw order is:
// W columns, X columns, class noise, outcome noise.
SimOutput generate(const SimSpec& spec, std::uint64_t seed);

}  // namespace lcop::sim
