#pragma once

#include <vector>

#include <Eigen/Core>

#include "spe/pilot.hpp"
#include "spe/sample.hpp"

namespace spe {

/// Product-Gaussian kernel density estimate at x:
///   (1/(n h^d)) sum_i prod_j phi((x_j - Y_ij)/h).
/// Rejects h <= 0.
double kde_evaluate(const Sample& s, double h, const Eigen::VectorXd& x);

/// Distribution function of the estimate: (1/n) sum_i prod_j Phi((t_j - Y_ij)/h).
double kde_cdf(const Sample& s, double h, const Eigen::VectorXd& t);

/// Exact integral of the squared estimate via the Gaussian convolution
/// identity  int phi_h(.-a) phi_h(.-b) = phi_{h sqrt2}(a-b)  per coordinate.
double kde_self_energy(const Sample& s, double h);

/// Least-squares cross-validation score
///   CV(h) = int fhat_h^2 - (2/n) sum_i fhat_{h,-i}(Y_i),
/// with the first term in closed form. Requires n >= 2.
double lscv_score(const Sample& s, double h);

/// argmin of CV over the supplied grid; ties break toward smaller h.
/// Rejects an empty grid and nonpositive entries.
double lscv_bandwidth(const Sample& s, const std::vector<double>& search_grid);

/// Default search grid: 30 log-spaced points spanning [0.05, 2] times the
/// Scott reference  geomean(sd_j) * n^{-1/(d+4)}.
std::vector<double> default_lscv_grid(const Sample& s);

PilotDensity kde_pilot(const Sample& s, double h);

double normal_cdf(double z);

}  // namespace spe
