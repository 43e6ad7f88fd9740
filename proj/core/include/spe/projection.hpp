#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "spe/grid.hpp"
#include "spe/mixture.hpp"
#include "spe/pilot.hpp"
#include "spe/sample.hpp"

namespace spe {

enum class MeanSolver { projected_gradient, trust_region };

struct ProjectionConfig {
  int S = 1;
  double qbar = 1.0;
  double box_M = 1.0;
  int max_outer_iters = 200;
  double rel_tol = 1e-8;        // relative criterion decrease for outer convergence
  MeanSolver mean_solver = MeanSolver::projected_gradient;
  double penalty_weight = 0.0;  // 0 disables the log-concavity penalty
  int weight_max_iters = 10000;
  int mean_max_iters = 500;     // inner steps per outer iteration
  int penalty_grid_cells = 32;  // per dimension, over [-M, M]^d
  std::optional<Eigen::MatrixXd> means_init;  // overrides the regular-grid start
};

/// Per-outer-iteration record of the alternation. Entry 0 is the
/// initialization; criterion is (1/n)||g - f(Y)||^2 and penalty the
/// log-concavity term (0 when disabled). criterion+penalty is
/// non-increasing within 1e-10 per step.
struct ProjectionTrace {
  std::vector<double> criterion;
  std::vector<double> penalty;
  std::vector<double> wall_ms;
  bool converged = false;
  int iterations = 0;
  bool weight_solver_hit_cap = false;
  int frozen_components = 0;  // mean updates skipped after gradient underflow

  double objective(std::size_t i) const { return criterion[i] + penalty[i]; }
  std::string to_csv() const;  // iteration, criterion, penalty, wall_ms
};

struct ProjectionResult {
  GaussianMixture mixture;
  ProjectionTrace trace;
};

/// Euclidean projection onto the probability simplex.
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v);

/// Design matrix Phi with Phi(i,s) = phi(Y_i; mu_s, qbar I_d); entries lie
/// in [0, (2 pi qbar)^{-d/2}].
Eigen::MatrixXd design_matrix(const Sample& s, const Eigen::MatrixXd& means, double qbar);

struct WeightSolution {
  Eigen::VectorXd weights;
  bool converged = false;
  int iterations = 0;
};

/// argmin over the simplex of ||target - Phi pi||^2 by projected gradient
/// with step 1/||Phi^T Phi||_2; at convergence the KKT residual (active
/// gradients against a common multiplier) is below 1e-6 on the scale of
/// the problem. On hitting the iteration cap the best iterate is
/// returned with converged = false.
WeightSolution solve_weights(const Eigen::VectorXd& target, const Eigen::MatrixXd& Phi,
                             const std::optional<Eigen::VectorXd>& init = std::nullopt,
                             int max_iters = 10000);

/// Max over components of the distance between the active-set gradient and
/// its common multiplier (0 at an exact KKT point of the simplex QP).
double weight_kkt_residual(const Eigen::VectorXd& target, const Eigen::MatrixXd& Phi,
                           const Eigen::VectorXd& weights, double active_tol = 1e-10);

struct MeanSolution {
  Eigen::MatrixXd means;
  int iterations = 0;
  int frozen = 0;
};

/// Descends (1/n) sum_i (target_i - f(Y_i))^2 in the component means by
/// projected gradient with Armijo backtracking, keeping iterates inside
/// [-M, M]^d. The analytic gradient of the criterion in mu_s is
///   -(2/n) sum_i r_i pi_s phi(Y_i; mu_s, qbar I) (Y_i - mu_s)/qbar.
/// A component whose gradient is non-finite (density underflow at every
/// datum) is frozen at its current value and counted.
MeanSolution solve_means(const Eigen::VectorXd& target, const Sample& s,
                         const Eigen::VectorXd& weights, const Eigen::MatrixXd& means_init,
                         const ProjectionConfig& cfg);

/// Least-squares alternation onto the spherical Gaussian mixture class:
/// weights start at the simplex center, means on a regular grid over
/// [-M, M]^d, then weight and mean subproblems alternate until the
/// relative criterion decrease drops below rel_tol.
ProjectionResult project(const PilotDensity& pilot, const Sample& s, const ProjectionConfig& cfg);

/// Same alternation with target values given directly at the data points.
ProjectionResult project_to_values(const Eigen::VectorXd& pilot_values, const Sample& s,
                                   const ProjectionConfig& cfg);

/// Projection of the 1/n-weighted point masses (g = f_n): the target is
/// the constant vector 1/n. Reproduces the mass-escape pathology of
/// unfiltered projection.
ProjectionResult direct_project(const Sample& s, const ProjectionConfig& cfg);

/// Minimum over grid points of the smallest eigenvalue of -grad grad^T
/// log f; >= 0 certifies log-concavity on the grid. Points where the
/// density underflows are skipped and counted.
double logconcavity_margin(const GaussianMixture& m, const EvalGrid& grid, int* skipped = nullptr);

/// Alternation on criterion + penalty_weight * max(0, -margin)^2 with the
/// margin taken over a fixed penalty_grid_cells^d grid on [-M, M]^d.
/// Requires penalty_weight > 0 and d <= 2 (the eigenvalue sweep is priced
/// for low dimension); with penalty_weight = 0 use project().
ProjectionResult penalized_project(const PilotDensity& pilot, const Sample& s,
                                   const ProjectionConfig& cfg);

/// Initial mean layout: an equally spaced k^d grid over [-M, M]^d where
/// k = S^(1/d) when S has an integer d-th root; otherwise the ceil(S^(1/d))^d
/// grid trimmed to the S points nearest the box center (stable order).
Eigen::MatrixXd initial_means_grid(int S, int d, double box_M);

namespace detail {
/// Margin over the grid together with its gradient in the means (the
/// eigenvalue derivative at the active grid point). Exposed for tests.
std::pair<double, Eigen::MatrixXd> margin_and_mean_gradient(const Eigen::VectorXd& weights,
                                                            const Eigen::MatrixXd& means,
                                                            double qbar, const EvalGrid& grid);
}  // namespace detail

}  // namespace spe
