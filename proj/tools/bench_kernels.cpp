#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "lcop/kernels.hpp"
#include "lcop/model.hpp"
#include "lcop/sim.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using lcop::Exec;
using lcop::model::ParamDraw;

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// Wall time of fn() repeated `reps` times, after one warmup call.
template <class Fn>
double time_reps(int reps, Fn&& fn) {
  fn();
  const double t0 = now_seconds();
  for (int r = 0; r < reps; ++r) fn();
  return (now_seconds() - t0) / reps;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

bool same_bits(const std::vector<int>& a, const std::vector<int>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(int)) == 0;
}

void report(const char* name, double serial_s, double parallel_s, bool equal) {
  std::printf("%-22s %10.3f us %12.3f us %8.2fx   %s\n", name, serial_s * 1e6, parallel_s * 1e6,
              serial_s / parallel_s, equal ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  int n = 100000;
  int reps = 20;
  for (int a = 1; a < argc; ++a) {
    if (std::strcmp(argv[a], "--n") == 0 && a + 1 < argc)
      n = std::atoi(argv[++a]);
    else if (std::strcmp(argv[a], "--reps") == 0 && a + 1 < argc)
      reps = std::atoi(argv[++a]);
    else {
      std::fprintf(stderr, "usage: %s [--n rows] [--reps repetitions]\n", argv[0]);
      return 2;
    }
  }

  lcop::sim::SimSpec spec = lcop::sim::builtin_setting(1);
  spec.n = n;
  lcop::sim::SimOutput sim = lcop::sim::generate(spec, 99);
  const auto& data = sim.data;

  ParamDraw theta;
  theta.alpha = spec.alpha_true;
  theta.beta = spec.beta_true;
  theta.sigma2 = spec.sigma2_true;
  theta.cutpoints = spec.cutpoints;

#ifdef _OPENMP
  std::printf("rows: %d, repetitions: %d, OpenMP threads: %d\n", n, reps, omp_get_max_threads());
#else
  std::printf("rows: %d, repetitions: %d, OpenMP unavailable (parallel lane runs serially)\n", n,
              reps);
#endif
  std::printf("%-22s %13s %15s %9s\n", "kernel", "serial", "parallel", "speedup");

  bool all_equal = true;
  {
    std::vector<double> p1s(n), p2s(n), p1p(n), p2p(n);
    auto run = [&](Exec e, double* p1, double* p2) {
      lcop::kernels::class_cond_table(e, data, theta.beta, theta.sigma2, theta.cutpoints, p1, p2);
    };
    double ts = time_reps(reps, [&] { run(Exec::serial, p1s.data(), p2s.data()); });
    double tp = time_reps(reps, [&] { run(Exec::parallel, p1p.data(), p2p.data()); });
    bool eq = same_bits(p1s, p1p) && same_bits(p2s, p2p);
    all_equal = all_equal && eq;
    report("class_cond_table", ts, tp, eq);

    std::vector<double> mixs(n), mixp(n), gs(n), gp(n);
    double ts2 = time_reps(reps, [&] {
      lcop::kernels::alpha_mix_terms(Exec::serial, data, theta.alpha, p1s.data(), p2s.data(),
                                     mixs.data(), gs.data());
    });
    double tp2 = time_reps(reps, [&] {
      lcop::kernels::alpha_mix_terms(Exec::parallel, data, theta.alpha, p1p.data(), p2p.data(),
                                     mixp.data(), gp.data());
    });
    bool eq2 = same_bits(mixs, mixp) && same_bits(gs, gp);
    all_equal = all_equal && eq2;
    report("alpha_mix_terms", ts2, tp2, eq2);

    std::vector<int> us(n), up(n);
    double ts3 = time_reps(reps, [&] {
      lcop::kernels::draw_class_indicators(Exec::serial, data, theta.alpha, p1s.data(), p2s.data(),
                                           7, 3, us.data());
    });
    double tp3 = time_reps(reps, [&] {
      lcop::kernels::draw_class_indicators(Exec::parallel, data, theta.alpha, p1p.data(),
                                           p2p.data(), 7, 3, up.data());
    });
    bool eq3 = same_bits(us, up);
    all_equal = all_equal && eq3;
    report("draw_class_indicators", ts3, tp3, eq3);

    std::vector<double> zs(n), zp(n);
    double ts4 = time_reps(reps, [&] {
      lcop::kernels::draw_latent_outcomes(Exec::serial, data, theta.beta, theta.sigma2,
                                          theta.cutpoints, us.data(), 7, 3, zs.data());
    });
    double tp4 = time_reps(reps, [&] {
      lcop::kernels::draw_latent_outcomes(Exec::parallel, data, theta.beta, theta.sigma2,
                                          theta.cutpoints, up.data(), 7, 3, zp.data());
    });
    bool eq4 = same_bits(zs, zp);
    all_equal = all_equal && eq4;
    report("draw_latent_outcomes", ts4, tp4, eq4);

    std::vector<double> ls(n), lp(n);
    double ts5 = time_reps(reps, [&] {
      lcop::kernels::draw_latent_class(Exec::serial, data, theta.alpha, us.data(), 7, 3,
                                       ls.data());
    });
    double tp5 = time_reps(reps, [&] {
      lcop::kernels::draw_latent_class(Exec::parallel, data, theta.alpha, up.data(), 7, 3,
                                       lp.data());
    });
    bool eq5 = same_bits(ls, lp);
    all_equal = all_equal && eq5;
    report("draw_latent_class", ts5, tp5, eq5);

    std::vector<double> lls(n), llp(n);
    double ts6 = time_reps(reps, [&] {
      lcop::kernels::mixture_loglik_terms(Exec::serial, data, theta, lls.data());
    });
    double tp6 = time_reps(reps, [&] {
      lcop::kernels::mixture_loglik_terms(Exec::parallel, data, theta, llp.data());
    });
    bool eq6 = same_bits(lls, llp);
    all_equal = all_equal && eq6;
    report("mixture_loglik_terms", ts6, tp6, eq6);
  }

  if (!all_equal) {
    std::fprintf(stderr, "lane outputs differ\n");
    return 1;
  }
  return 0;
}
