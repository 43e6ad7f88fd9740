#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "spe/graphical.hpp"
#include "spe/mixture.hpp"

namespace spe {

/// A simulation truth: exact density evaluation, seeded sampling, and the
/// exact integral of the squared density (used by the MC ISE identity).
struct TrueDensity {
  std::string label;
  int dim = 0;
  std::function<double(const Eigen::VectorXd&)> density;
  std::function<Eigen::MatrixXd(int count, std::uint64_t seed)> sample;
  double self_energy = 0.0;  // exact integral of density^2
  std::optional<GraphicalFactorization> factorization;  // when the model implies one
};

/// (i) Bivariate normal location-scale mixture:
/// pi = (1/2, 1/2), mu1 = (1,2), mu2 = (-1,1),
/// Sigma1 = [2 -0.5; -0.5 1.5], Sigma2 = [4 0.9; 0.9 1.5].
TrueDensity make_scenario_i();

/// (ii) Independent Gamma(2,1) marginals on the positive quadrant.
TrueDensity make_scenario_ii();

/// (iii) 500-component equal-weight ring: means 4(cos t_j, sin t_j) on
/// equally spaced angles, spherical scale 0.7.
TrueDensity make_scenario_iii();
GaussianMixture make_scenario_iii_mixture();

/// Five-dimensional zero-mean Gaussian graphical model N(0, A^{-1}) with
/// the fixed sparse precision matrix A; exposes the implied factorization
/// (Y5|Y2)(Y4|Y2)(Y2)(Y1)(Y3).
TrueDensity make_ggm5();
Eigen::MatrixXd ggm5_precision();

/// Lookup by label: normal-mix | gamma-indep | ring | ggm5 (aliases i/ii/iii).
TrueDensity scenario_by_name(const std::string& name);

}  // namespace spe
