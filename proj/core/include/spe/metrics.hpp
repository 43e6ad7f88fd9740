#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "spe/grid.hpp"
#include "spe/mixture.hpp"
#include "spe/pilot.hpp"
#include "spe/sample.hpp"

namespace spe {

using DensityFn = std::function<double(const Eigen::VectorXd&)>;
using SamplerFn = std::function<Eigen::MatrixXd(int count, std::uint64_t seed)>;

struct IseGridDiag {
  double f_hat_boundary_mass = 0.0;
  double f_true_boundary_mass = 0.0;
  bool boundary_warning = false;  // set when either exceeds 1e-3
};

/// Riemann midpoint sum of (f_hat - f_true)^2 over the grid. The grid is
/// expected to cover a box holding >= 1 - 1e-4 of f_true's mass; a
/// diagnostic flag is raised when boundary cells carry more than 1e-3 of
/// either density's mass.
double ise_grid(const DensityFn& f_hat, const DensityFn& f_true, const EvalGrid& grid,
                IseGridDiag* diag = nullptr);

struct McEstimate {
  double value = 0.0;
  double stderr_value = 0.0;
};

/// Exact integral of the squared mixture density via pairwise Gaussian
/// overlaps: sum_{s,t} pi_s pi_t phi(mu_s - mu_t; 0, 2 qbar I).
double mixture_self_energy(const GaussianMixture& m);

/// Monte-Carlo ISE between a mixture and an evaluable+sampleable truth:
///   int (fhat - f0)^2 = int fhat^2 + int f0^2 - 2 E0[fhat],
/// with both self-energies exact (f0_self_energy supplied by the caller)
/// and only the cross term estimated from `count` draws of the truth.
McEstimate ise_mc(const GaussianMixture& f_hat, const DensityFn& f_true,
                  double f0_self_energy, const SamplerFn& f_true_sampler, int count,
                  std::uint64_t seed);

/// Same identity for an arbitrary density whose exact self-energy is
/// known (plain and graphical histograms expose one); used for pilot ISE
/// in d >= 3 where grid quadrature is unavailable.
McEstimate ise_mc_density(const DensityFn& f_hat, double f_hat_self_energy,
                          double f0_self_energy, const SamplerFn& f_true_sampler, int count,
                          std::uint64_t seed);

/// Max over probe points of |F_pilot(t) - F_n(t)|, the pilot-vs-empirical
/// distribution diagnostic. Both the value at t and the limit from below
/// (strict counts) enter the max. Only histogram and Gaussian-kernel KDE
/// pilots are accepted (closed-form CDFs); others throw. With no probes
/// supplied, the data points are used.
double sup_cdf_distance(const PilotDensity& pilot, const Sample& s,
                        const std::vector<Eigen::VectorXd>& probe_points = {});

/// P(mixture in axis-aligned box), exact per-coordinate Gaussian CDFs.
double mass_in_box(const GaussianMixture& m, const Eigen::VectorXd& lo,
                   const Eigen::VectorXd& hi);

/// P(mixture in centered ball), Monte Carlo with reported standard error.
McEstimate mass_in_ball(const GaussianMixture& m, const Eigen::VectorXd& center, double radius,
                        int count, std::uint64_t seed);

/// Axis-aligned cells approximating the smallest set of given f_true-mass.
struct RegionCells {
  std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> boxes;  // (lo, hi)
  double true_mass = 0.0;  // f_true mass actually captured
};

/// Cells of the grid, taken in decreasing f_true order until their mass
/// reaches `target_mass` (0.5 for the central half-mass region).
RegionCells density_upper_level_cells(const DensityFn& f_true, const EvalGrid& grid,
                                      double target_mass);

double mass_in_cells(const GaussianMixture& m, const RegionCells& region);

/// One benchmark replication record and its aggregates.
struct IseRecord {
  std::string scenario;
  std::string method;
  int n = 0;
  std::uint64_t seed = 0;
  double ise = 0.0;
  double wall_ms = 0.0;
};

struct IseAggregate {
  std::string scenario;
  std::string method;
  int n = 0;
  int reps = 0;
  double mean = 0.0;
  double median = 0.0;
  double variance = 0.0;
};

struct IseReport {
  std::vector<IseRecord> records;
  std::string to_csv() const;  // scenario,method,n,seed,ise,sqrt_ise,wall_ms
  std::vector<IseAggregate> aggregate() const;
};

double median_of(std::vector<double> values);

}  // namespace spe
