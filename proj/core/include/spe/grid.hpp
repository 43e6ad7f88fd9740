#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace spe {

/// Regular evaluation grid: per-dimension breakpoints and the flattened
/// cell midpoints at which densities are probed. Quadrature against the
/// grid is the midpoint rule with weight cell_volume per point.
struct EvalGrid {
  std::vector<Eigen::VectorXd> breakpoints;  // strictly increasing, size cells+1 per dim
  double cell_volume = 0.0;                  // product of per-dimension spacings
  Eigen::MatrixXd points;                    // (prod cells) x d midpoints, row-major over dims

  static EvalGrid regular(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, int cells_per_dim);

  int dim() const { return static_cast<int>(breakpoints.size()); }
  std::size_t size() const { return static_cast<std::size_t>(points.rows()); }

  /// True when flattened point idx lies in a first/last cell of any dimension.
  bool is_boundary(std::size_t idx) const;

 private:
  std::vector<int> cells_;  // cells per dim, for boundary arithmetic
};

}  // namespace spe
