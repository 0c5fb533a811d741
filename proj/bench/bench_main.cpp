// Serial versus OpenMP restarts, and reference versus tabulated loss evaluation.
//
// usage: quadforge_bench [threads] [restarts]
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include <omp.h>

#include "quadforge/optimizer.hpp"
#include "quadforge/quadrature.hpp"

using namespace quadforge;

namespace {

template <class F>
double seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void bench_search(int dim, int p, long q, long restarts, int threads) {
  // One point below a workable count, so every restart runs to its own stop.
  SearchConfig config;
  config.start_q = q;
  config.max_restarts_per_q = restarts;
  config.max_q_increments = 0;
  config.threads = threads;

  SearchReport serial, parallel;
  const double ts = seconds([&] { serial = search_serial(dim, p, config); });
  const double tp = seconds([&] { parallel = search(dim, p, config); });
  const bool same = serial.restarts_used == parallel.restarts_used && serial.final_L_squared == parallel.final_L_squared;
  std::printf("search %dD p=%d q=%ld restarts=%ld  serial %.3f s  openmp(%d) %.3f s  speedup %.2fx  %s\n", dim, p, q,
              restarts, ts, threads, tp, ts / tp, same ? "identical" : "MISMATCH");
}

void bench_loss(int dim, int p, long q, int reps) {
  const auto basis = product_space_basis(dim, p);
  const auto rule = initialize_rule(dim, q, 1);
  LossKernel kernel(basis);
  std::vector<double> g(rule.params().size());
  double sink = 0.0;
  const double tr = seconds([&] {
    for (int k = 0; k < reps; ++k) {
      sink += loss(basis, rule).L_squared;
      sink += loss_gradient(basis, rule)[0];
    }
  });
  const double tk = seconds([&] {
    for (int k = 0; k < reps; ++k) sink += kernel.evaluate(rule.params(), g);
  });
  std::printf("loss+gradient %dD p=%d q=%ld  reference %.2f us  kernel %.2f us  ratio %.1fx  (%g)\n", dim, p, q,
              1e6 * tr / reps, 1e6 * tk / reps, tr / tk, sink > 0 ? 1.0 : 0.0);
}

}  // namespace

int main(int argc, char** argv) {
  const int threads = argc > 1 ? std::atoi(argv[1]) : omp_get_max_threads();
  const long restarts = argc > 2 ? std::atol(argv[2]) : 32;

  bench_loss(2, 3, 13, 2000);
  bench_loss(2, 6, 36, 200);
  bench_loss(3, 3, 43, 50);

  bench_search(2, 4, 18, restarts, threads);
  bench_search(3, 2, 22, restarts, threads);
  return 0;
}
