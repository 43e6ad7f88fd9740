// Independent checking machinery for the test suite: brute-force and
// finite-difference routes that never touch the implementation paths they
// verify.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace oracles {

using Fn = std::function<double(const Eigen::VectorXd&)>;

/// Central-difference gradient.
inline Eigen::VectorXd fd_gradient(const Fn& f, const Eigen::VectorXd& x, double h = 1e-5) {
  Eigen::VectorXd g(x.size());
  for (int j = 0; j < x.size(); ++j) {
    Eigen::VectorXd xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    g[j] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

/// Central-difference Hessian (second differences of f).
inline Eigen::MatrixXd fd_hessian(const Fn& f, const Eigen::VectorXd& x, double h = 1e-4) {
  const int d = static_cast<int>(x.size());
  Eigen::MatrixXd out(d, d);
  const double f0 = f(x);
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      if (i == j) {
        Eigen::VectorXd xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        out(i, i) = (f(xp) - 2.0 * f0 + f(xm)) / (h * h);
      } else {
        Eigen::VectorXd xpp = x, xpm = x, xmp = x, xmm = x;
        xpp[i] += h; xpp[j] += h;
        xpm[i] += h; xpm[j] -= h;
        xmp[i] -= h; xmp[j] += h;
        xmm[i] -= h; xmm[j] -= h;
        out(i, j) = out(j, i) = (f(xpp) - f(xpm) - f(xmp) + f(xmm)) / (4.0 * h * h);
      }
    }
  }
  return out;
}

/// Midpoint-rule quadrature over a box, d arbitrary (keep cells^d small).
inline double box_quadrature(const Fn& f, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                             int cells_per_dim) {
  const int d = static_cast<int>(lo.size());
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  std::vector<double> step(static_cast<std::size_t>(d));
  double vol = 1.0;
  for (int j = 0; j < d; ++j) {
    step[static_cast<std::size_t>(j)] = (hi[j] - lo[j]) / cells_per_dim;
    vol *= step[static_cast<std::size_t>(j)];
  }
  long long total = 1;
  for (int j = 0; j < d; ++j) total *= cells_per_dim;
  double acc = 0.0;
  Eigen::VectorXd x(d);
  for (long long r = 0; r < total; ++r) {
    for (int j = 0; j < d; ++j)
      x[j] = lo[j] + (idx[static_cast<std::size_t>(j)] + 0.5) * step[static_cast<std::size_t>(j)];
    acc += f(x);
    for (int j = d - 1; j >= 0; --j) {
      if (++idx[static_cast<std::size_t>(j)] < cells_per_dim) break;
      idx[static_cast<std::size_t>(j)] = 0;
    }
  }
  return acc * vol;
}

/// Kolmogorov-Smirnov distance between a 1-d sample and a CDF.
inline double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double best = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double c = cdf(sample[i]);
    best = std::max(best, std::abs(c - static_cast<double>(i + 1) / n));
    best = std::max(best, std::abs(c - static_cast<double>(i) / n));
  }
  return best;
}

/// Exhaustive search over the simplex grid with the given spacing:
/// minimizes ||target - Phi pi||^2 over compositions of 1/step.
inline double simplex_grid_best_objective(const Eigen::VectorXd& target,
                                          const Eigen::MatrixXd& Phi, double step) {
  if (Phi.cols() != 3) throw std::invalid_argument("simplex grid oracle is written for S = 3");
  const int m = static_cast<int>(std::llround(1.0 / step));
  const Eigen::MatrixXd G = Phi.transpose() * Phi;
  const Eigen::VectorXd b = Phi.transpose() * target;
  const double c0 = target.squaredNorm();
  double best = std::numeric_limits<double>::infinity();
  Eigen::Vector3d pi;
  for (int i = 0; i <= m; ++i) {
    for (int j = 0; j <= m - i; ++j) {
      pi << static_cast<double>(i) / m, static_cast<double>(j) / m,
          static_cast<double>(m - i - j) / m;
      const double obj = pi.dot(G * pi) - 2.0 * b.dot(pi) + c0;
      best = std::min(best, obj);
    }
  }
  return best;
}

}  // namespace oracles
