#pragma once

#include <cstdint>
#include <vector>

#include "spe/mixture.hpp"
#include "spe/sample.hpp"

namespace spe {

struct EmConfig {
  int S = 1;
  double qbar = 1.0;
  int max_iters = 500;
  double loglik_rel_tol = 1e-8;
  std::uint64_t seed = 0;
};

struct EmResult {
  GaussianMixture mixture;
  std::vector<double> loglik_trace;  // one entry per iteration, non-decreasing
  bool converged = false;
  int reinit_count = 0;  // components restarted after responsibility underflow
};

/// Fixed-scale spherical-Gaussian EM (the Kiefer-Wolfowitz-style location
/// mixture): responsibilities gamma_is ~ pi_s phi(Y_i; mu_s, qbar I), M-step
/// pi_s = mean_i gamma_is and mu_s = weighted data mean; qbar is never
/// updated. Means are initialized at S distinct data rows drawn with the
/// config seed. A component whose responsibilities vanish entirely is
/// restarted at a random datum and counted in reinit_count.
EmResult em_spherical(const Sample& s, const EmConfig& cfg);

}  // namespace spe
