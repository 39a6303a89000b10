#pragma once

#include <cstdint>

#include "lcop/exec.hpp"
#include "lcop/model.hpp"

// Per-observation kernels behind the samplers. Each kernel fills one output
// slot per observation and never reduces across observations, so the OpenMP
// lane is bit-identical to the serial reference lane; callers perform any
// reductions serially. Random draws read a dedicated substream per
// (purpose, sweep, observation), which makes them schedule-independent.
namespace lcop::kernels {

using Eigen::VectorXd;
using Eigen::VectorXi;

// P(y_i | s = 1) and P(y_i | s = 2) for every observation.
struct ClassCondTable {
  VectorXd p1, p2;
};

namespace serial {
void class_cond_table(const model::Dataset& data, const std::array<VectorXd, 2>& beta,
                      const std::array<double, 2>& sigma2, const model::Cutpoints& cutpoints,
                      double* p1, double* p2);
void mixture_loglik_terms(const model::Dataset& data, const model::ParamDraw& theta, double* out);
// log mixture term per observation at this alpha, given the class-conditional
// table; grad_coef (optional) is d/d(eta_i) of the log term with eta_i = w_i'alpha.
void alpha_mix_terms(const model::Dataset& data, const VectorXd& alpha, const double* p1,
                     const double* p2, double* log_mix, double* grad_coef);
void draw_class_indicators(const model::Dataset& data, const VectorXd& alpha, const double* p1,
                           const double* p2, std::uint64_t seed, std::uint64_t sweep, int* u_out);
void draw_latent_outcomes(const model::Dataset& data, const std::array<VectorXd, 2>& beta,
                          const std::array<double, 2>& sigma2, const model::Cutpoints& cutpoints,
                          const int* u, std::uint64_t seed, std::uint64_t sweep, double* z_out);
void draw_latent_class(const model::Dataset& data, const VectorXd& alpha, const int* u,
                       std::uint64_t seed, std::uint64_t sweep, double* l_out);
}  // namespace serial

namespace omp_lane {
void class_cond_table(const model::Dataset& data, const std::array<VectorXd, 2>& beta,
                      const std::array<double, 2>& sigma2, const model::Cutpoints& cutpoints,
                      double* p1, double* p2);
void mixture_loglik_terms(const model::Dataset& data, const model::ParamDraw& theta, double* out);
void alpha_mix_terms(const model::Dataset& data, const VectorXd& alpha, const double* p1,
                     const double* p2, double* log_mix, double* grad_coef);
void draw_class_indicators(const model::Dataset& data, const VectorXd& alpha, const double* p1,
                           const double* p2, std::uint64_t seed, std::uint64_t sweep, int* u_out);
void draw_latent_outcomes(const model::Dataset& data, const std::array<VectorXd, 2>& beta,
                          const std::array<double, 2>& sigma2, const model::Cutpoints& cutpoints,
                          const int* u, std::uint64_t seed, std::uint64_t sweep, double* z_out);
void draw_latent_class(const model::Dataset& data, const VectorXd& alpha, const int* u,
                       std::uint64_t seed, std::uint64_t sweep, double* l_out);
}  // namespace omp_lane

// Lane dispatchers.
inline void class_cond_table(Exec exec, const model::Dataset& data,
                             const std::array<VectorXd, 2>& beta,
                             const std::array<double, 2>& sigma2,
                             const model::Cutpoints& cutpoints, double* p1, double* p2) {
  if (exec == Exec::parallel)
    omp_lane::class_cond_table(data, beta, sigma2, cutpoints, p1, p2);
  else
    serial::class_cond_table(data, beta, sigma2, cutpoints, p1, p2);
}

inline void mixture_loglik_terms(Exec exec, const model::Dataset& data,
                                 const model::ParamDraw& theta, double* out) {
  if (exec == Exec::parallel)
    omp_lane::mixture_loglik_terms(data, theta, out);
  else
    serial::mixture_loglik_terms(data, theta, out);
}

inline void alpha_mix_terms(Exec exec, const model::Dataset& data, const VectorXd& alpha,
                            const double* p1, const double* p2, double* log_mix,
                            double* grad_coef) {
  if (exec == Exec::parallel)
    omp_lane::alpha_mix_terms(data, alpha, p1, p2, log_mix, grad_coef);
  else
    serial::alpha_mix_terms(data, alpha, p1, p2, log_mix, grad_coef);
}

inline void draw_class_indicators(Exec exec, const model::Dataset& data, const VectorXd& alpha,
                                  const double* p1, const double* p2, std::uint64_t seed,
                                  std::uint64_t sweep, int* u_out) {
  if (exec == Exec::parallel)
    omp_lane::draw_class_indicators(data, alpha, p1, p2, seed, sweep, u_out);
  else
    serial::draw_class_indicators(data, alpha, p1, p2, seed, sweep, u_out);
}

inline void draw_latent_outcomes(Exec exec, const model::Dataset& data,
                                 const std::array<VectorXd, 2>& beta,
                                 const std::array<double, 2>& sigma2,
                                 const model::Cutpoints& cutpoints, const int* u,
                                 std::uint64_t seed, std::uint64_t sweep, double* z_out) {
  if (exec == Exec::parallel)
    omp_lane::draw_latent_outcomes(data, beta, sigma2, cutpoints, u, seed, sweep, z_out);
  else
    serial::draw_latent_outcomes(data, beta, sigma2, cutpoints, u, seed, sweep, z_out);
}

inline void draw_latent_class(Exec exec, const model::Dataset& data, const VectorXd& alpha,
                              const int* u, std::uint64_t seed, std::uint64_t sweep,
                              double* l_out) {
  if (exec == Exec::parallel)
    omp_lane::draw_latent_class(data, alpha, u, seed, sweep, l_out);
  else
    serial::draw_latent_class(data, alpha, u, seed, sweep, l_out);
}

}  // namespace lcop::kernels
