#pragma once

#include <memory>
#include <vector>

#include <Eigen/Core>

#include "spe/pilot.hpp"
#include "spe/sample.hpp"

namespace spe {

/// One factor of a conditional factorization: the density of `target`
/// given the bins of the `given` variables (0-based variable indices).
struct GraphicalFactor {
  int target = 0;
  std::vector<int> given;
};

/// Ordered factor list describing f(y) = prod_f f(y_target | y_given-bins).
/// Every variable must appear as a target exactly once and the implied
/// dependency graph must be acyclic; the listing order itself is free.
struct GraphicalFactorization {
  std::vector<GraphicalFactor> factors;

  void validate(int d) const;  // throws std::invalid_argument
  /// Factor evaluation/enumeration order: parents before children.
  std::vector<int> topological_order(int d) const;

  /// d independent univariate factors.
  static GraphicalFactorization independent(int d);
};

/// Factorized histogram: each conditional f(y_j | y_k in B_k) is a 1-d
/// histogram of coordinate j over the subsample whose conditioning
/// coordinates share y's bins. All coordinates use origin anchors and the
/// supplied per-coordinate widths; a conditioning cell with no data makes
/// the joint value 0 there.
class GraphicalHistogram {
 public:
  GraphicalHistogram(const Sample& s, GraphicalFactorization fact, Eigen::VectorXd widths);

  int dim() const { return static_cast<int>(widths_.size()); }
  const Eigen::VectorXd& widths() const { return widths_; }

  double operator()(const Eigen::VectorXd& y) const;

  /// Exact integral over the partition (1 up to round-off, by chain rule).
  double integral() const;
  /// Exact integral of the squared density, by enumerating populated cells.
  double self_energy() const;

 private:
  struct FactorTable;
  double accumulate_cells(bool squared) const;

  GraphicalFactorization fact_;
  Eigen::VectorXd widths_;
  std::vector<int> topo_;                       // factor indices, parents first
  std::vector<std::shared_ptr<FactorTable>> tables_;  // parallel to fact_.factors
};

PilotDensity graphical_histogram_fit(const Sample& s, const GraphicalFactorization& fact,
                                     const Eigen::VectorXd& widths);

}  // namespace spe
