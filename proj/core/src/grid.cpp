#include "spe/grid.hpp"

#include <stdexcept>

namespace spe {

EvalGrid EvalGrid::regular(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, int cells_per_dim) {
  const int d = static_cast<int>(lo.size());
  if (hi.size() != d) throw std::invalid_argument("EvalGrid::regular: lo/hi dimension mismatch");
  if (cells_per_dim < 1) throw std::invalid_argument("EvalGrid::regular: need >= 1 cell per dim");

  EvalGrid g;
  g.cell_volume = 1.0;
  g.breakpoints.resize(d);
  g.cells_.assign(d, cells_per_dim);
  std::size_t total = 1;
  for (int j = 0; j < d; ++j) {
    if (!(hi[j] > lo[j])) throw std::invalid_argument("EvalGrid::regular: need hi > lo");
    double h = (hi[j] - lo[j]) / cells_per_dim;
    g.cell_volume *= h;
    Eigen::VectorXd bp(cells_per_dim + 1);
    for (int k = 0; k <= cells_per_dim; ++k) bp[k] = lo[j] + h * k;
    g.breakpoints[j] = bp;
    total *= static_cast<std::size_t>(cells_per_dim);
  }
  g.points.resize(static_cast<Eigen::Index>(total), d);
  // row-major enumeration: last dimension varies fastest
  std::vector<int> idx(d, 0);
  for (std::size_t r = 0; r < total; ++r) {
    for (int j = 0; j < d; ++j)
      g.points(static_cast<Eigen::Index>(r), j) =
          0.5 * (g.breakpoints[j][idx[j]] + g.breakpoints[j][idx[j] + 1]);
    for (int j = d - 1; j >= 0; --j) {
      if (++idx[j] < cells_per_dim) break;
      idx[j] = 0;
    }
  }
  return g;
}

bool EvalGrid::is_boundary(std::size_t idx) const {
  const int d = dim();
  std::size_t rem = idx;
  for (int j = d - 1; j >= 0; --j) {
    int c = cells_[static_cast<std::size_t>(j)];
    int k = static_cast<int>(rem % static_cast<std::size_t>(c));
    rem /= static_cast<std::size_t>(c);
    if (k == 0 || k == c - 1) return true;
  }
  return false;
}

}  // namespace spe
