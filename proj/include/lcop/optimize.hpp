#pragma once

#include <Eigen/Dense>
#include <functional>

namespace lcop::optimize {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Objective callback: returns the value at x and, when grad is non-null,
// writes the analytic gradient into it.
using ObjFn = std::function<double(const VectorXd& x, VectorXd* grad)>;

struct ModeResult {
  VectorXd mode;
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Quasi-Newton (BFGS) ascent with backtracking line search. Stops when the
// gradient sup-norm drops to grad_tol or max_iter is reached; on
// non-convergence the last iterate is returned with converged = false.
ModeResult maximize_bfgs(const ObjFn& f, const VectorXd& x0, int max_iter, double grad_tol);

// Hessian of f at x by central differences of the gradient, one column per
// coordinate with step 1e-4 * (1 + |x_k|), symmetrized.
MatrixXd central_diff_hessian(const ObjFn& f, const VectorXd& x);

}  // namespace lcop::optimize
