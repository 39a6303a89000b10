#include "lcop/optimize.hpp"

#include <cmath>
#include <limits>

#include "lcop/errors.hpp"

namespace lcop::optimize {

ModeResult maximize_bfgs(const ObjFn& f, const VectorXd& x0, int max_iter, double grad_tol) {
  const int n = static_cast<int>(x0.size());
  VectorXd x = x0, g(n);
  double fx = f(x, &g);
  if (!std::isfinite(fx)) throw NumericalError("maximize_bfgs: objective not finite at start");

  MatrixXd h_inv = MatrixXd::Identity(n, n);  // inverse Hessian of -f
  ModeResult res;
  res.converged = g.lpNorm<Eigen::Infinity>() <= grad_tol;

  int iter = 0;
  while (!res.converged && iter < max_iter) {
    ++iter;
    VectorXd d = h_inv * g;
    if (g.dot(d) <= 0.0) {
      h_inv = MatrixXd::Identity(n, n);
      d = g;
    }
    // Backtracking Armijo search along the ascent direction.
    const double slope = g.dot(d);
    double step = 1.0;
    double f_new = -std::numeric_limits<double>::infinity();
    VectorXd x_new;
    while (step > 1e-14) {
      x_new = x + step * d;
      f_new = f(x_new, nullptr);
      if (std::isfinite(f_new) && f_new >= fx + 1e-4 * step * slope) break;
      step *= 0.5;
    }
    if (step <= 1e-14) break;  // no ascent possible, report last iterate

    VectorXd g_new(n);
    f(x_new, &g_new);
    VectorXd s = x_new - x;
    VectorXd yv = g - g_new;  // gradient change of -f
    double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      double rho = 1.0 / sy;
      MatrixXd left = MatrixXd::Identity(n, n) - rho * s * yv.transpose();
      h_inv = left * h_inv * left.transpose() + rho * s * s.transpose();
    }
    x = x_new;
    fx = f_new;
    g = g_new;
    res.converged = g.lpNorm<Eigen::Infinity>() <= grad_tol;
  }
  res.mode = x;
  res.value = fx;
  res.iterations = iter;
  return res;
}

MatrixXd central_diff_hessian(const ObjFn& f, const VectorXd& x) {
  const int n = static_cast<int>(x.size());
  MatrixXd hess(n, n);
  VectorXd gp(n), gm(n), xp = x, xm = x;
  for (int k = 0; k < n; ++k) {
    const double h = 1e-4 * (1.0 + std::abs(x[k]));
    xp[k] = x[k] + h;
    xm[k] = x[k] - h;
    f(xp, &gp);
    f(xm, &gm);
    hess.col(k) = (gp - gm) / (2.0 * h);
    xp[k] = x[k];
    xm[k] = x[k];
  }
  return 0.5 * (hess + hess.transpose());
}

}  // namespace lcop::optimize
