// Timing comparison of the serial and OpenMP frequency-sweep kernels on a
// synthetic consensus system, verifying along the way that both produce
// identical samples.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <vector>

#include "margins/model.hpp"
#include "margins/sweep.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using namespace margins;

double time_ms(const std::function<void()>& fn, int reps) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(
        best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

bool same(double a, double b) {
  return a == b || (std::isnan(a) && std::isnan(b));
}

}  // namespace

int main() {
  AgentModel model;
  model.A.resize(2, 2);
  model.A << -2.0, 2.0, -1.0, 1.0;
  model.B.resize(2, 1);
  model.B << 1.0, 0.0;
  model.K.resize(1, 2);
  model.K << -2.0, -0.5;
  model.c = 0.15;

  TransformedLoop loop;
  loop.p = 2;
  loop.lambda_p = Complex(1.0, 0.0);
  loop.model = model;

  SweepConfig cfg;
  cfg.grid_points = 200000;  // large enough to make the fan-out visible
  const std::vector<double> grid = build_grid(loop, cfg);

  std::vector<SweepSample> serial, parallel;
  const double t_serial =
      time_ms([&] { serial = sweep_loop_serial(loop, grid); }, 3);
  cfg.parallel = true;
  const double t_parallel =
      time_ms([&] { parallel = sweep_loop(loop, grid, cfg); }, 3);

  bool identical = serial.size() == parallel.size();
  for (std::size_t i = 0; identical && i < serial.size(); ++i) {
    identical =
        serial[i].omega == parallel[i].omega &&
        serial[i].near_pole == parallel[i].near_pole &&
        serial[i].singular_values.size() ==
            parallel[i].singular_values.size() &&
        (serial[i].singular_values.array() ==
         parallel[i].singular_values.array())
            .all() &&
        same(serial[i].lam_min_sym, parallel[i].lam_min_sym) &&
        same(serial[i].y_small_signed, parallel[i].y_small_signed);
  }

  int threads = 1;
#ifdef _OPENMP
#pragma omp parallel
  {
#pragma omp single
    threads = omp_get_num_threads();
  }
#endif

  std::printf("grid points        : %d\n", cfg.grid_points);
  std::printf("threads            : %d\n", threads);
  std::printf("serial sweep       : %.2f ms\n", t_serial);
  std::printf("parallel sweep     : %.2f ms\n", t_parallel);
  std::printf("speedup            : %.2fx\n", t_serial / t_parallel);
  std::printf("outputs identical  : %s\n", identical ? "yes" : "NO");
  return identical ? 0 : 1;
}
