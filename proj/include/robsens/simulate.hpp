#pragma once

#include <cstdint>
#include <vector>

#include "robsens/dataset.hpp"

namespace robsens {

struct SimSpec {
  int n = 100;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Synthetic observational sample with one observed covariate, a latent
/// confounder driving both treatment and outcome, and a constant unit-level
/// effect of 5 (so every weighted average effect equals 5).
struct SimulatedData {
  Dataset data;           // canonical order, designs not built
  std::vector<double> u;  // latent confounder, canonical order; debug only
  double true_tau = 5.0;
};

/// X ~ U[0,1]; U|X ~ U[0,1] when X <= 0.7, else U[0,100];
/// Z ~ Bernoulli(logit^{-1}(0.1 U - X)); Y(0) = 2X + 3U; Y(1) = Y(0) + 5.
/// Redraws the whole sample (up to 100 times) if an arm comes out empty.
SimulatedData generate(const SimSpec& spec);

}  // namespace robsens
