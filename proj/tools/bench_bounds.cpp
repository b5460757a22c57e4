// Scratch benchmark for the bound-solve hot path at bootstrap-replicate
// shapes. Not part of the test suite.
#include <chrono>
#include <cstdio>

#include "robsens/bootstrap.hpp"
#include "robsens/bounds.hpp"
#include "robsens/logistic.hpp"
#include "robsens/simulate.hpp"

using namespace robsens;
using Clock = std::chrono::steady_clock;

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 300;
  const int reps = argc > 2 ? std::atoi(argv[2]) : 10;
  const double lambda = std::exp(2.0), d1 = 0.5, d0 = 0.2;

  SimulatedData sim = generate({n, 42});
  Dataset data = build_designs(sim.data, TransformSpec::identity({"x"}, {"x"}));
  PropensityFit fit0 = fit_mle(data);
  printf("n=%d n1=%d n0=%d\n", data.n(), data.n1(), data.n0());

  SensitivityParams params;
  params.lambda1 = params.lambda0 = lambda;
  params.delta1 = d1;
  params.delta0 = d0;

  auto t0 = Clock::now();
  long iters = 0;
  for (int b = 0; b < reps; ++b) {
    Rng rng = Rng::for_replicate(7, b);
    std::vector<int> k = draw_multinomial(data.n(), rng);
    PropensityFit fb = fit_mle(data, k, fit0.beta);
    BoundsProblem prob = make_bounds_problem(data, fb.fitted, params, k);
    BoundsResult r = solve_bounds(prob, BoundsMode::RelaxedLp);
    iters += r.stats.lp_iterations;
    if (b == 0)
      printf("replicate bounds: [%.4f, %.4f] iters=%ld\n", r.tau_min,
             r.tau_max, r.stats.lp_iterations);
  }
  auto t1 = Clock::now();
  double sec = std::chrono::duration<double>(t1 - t0).count();
  printf("%d replicate pairs: %.3f s (%.1f ms/pair, %ld lp iters total)\n",
         reps, sec, 1e3 * sec / reps, iters);

  // collapse path timing at lambda=1, delta=0
  SensitivityParams collapse;
  auto t2 = Clock::now();
  BoundsProblem cp = make_bounds_problem(data, fit0.fitted, collapse);
  BoundsResult cr = solve_bounds(cp, BoundsMode::RelaxedLp);
  auto t3 = Clock::now();
  printf("collapse point: %.6f in %.3f ms\n", cr.tau_min,
         std::chrono::duration<double>(t3 - t2).count() * 1e3);
  return 0;
}
