#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "spe/pilot.hpp"
#include "spe/sample.hpp"

namespace spe {

using BinIndex = std::vector<std::int64_t>;

struct BinIndexHash {
  std::size_t operator()(const BinIndex& idx) const {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (auto v : idx) {
      h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
  }
};

/// d-dimensional histogram on the regular partition defined by an anchor
/// point and per-dimension widths; bins are right-open [a, a+h). Bin
/// masses are multiples of 1/n and sum to 1; the density in bin b is
/// mass(b) / prod_j h_j.
struct HistogramEstimate {
  Eigen::VectorXd anchor;
  Eigen::VectorXd widths;
  int n = 0;
  std::unordered_map<BinIndex, double, BinIndexHash> bins;

  int dim() const { return static_cast<int>(widths.size()); }
  double bin_volume() const { return widths.prod(); }
  BinIndex bin_of(const Eigen::VectorXd& x) const;
};

/// Bin index of row i is floor((Y_ij - anchor_j)/h_j) per coordinate.
/// Rejects nonpositive widths.
HistogramEstimate histogram_fit(const Sample& s, const Eigen::VectorXd& widths,
                                const Eigen::VectorXd& anchor);

/// mass(bin(x)) / (n-normalized bin volume); 0 for empty bins.
double histogram_evaluate(const HistogramEstimate& h, const Eigen::VectorXd& x);

/// Distribution function of the histogram density (piecewise multilinear).
double histogram_cdf(const HistogramEstimate& h, const Eigen::VectorXd& t);

/// Exact integral of the squared histogram density: sum_b mass_b^2 / vol.
double histogram_self_energy(const HistogramEstimate& h);

PilotDensity histogram_pilot(HistogramEstimate h);

/// Equal-weight average of `count` histograms: one anchored at the origin
/// and count-1 with seeded anchor shifts, each coordinate uniform in
/// +-perturbation_fraction * h_j. Requires count >= 2 and
/// perturbation_fraction in [0, 1).
PilotDensity perturbed_histogram_fit(const Sample& s, const Eigen::VectorXd& widths,
                                     double perturbation_fraction, int count,
                                     std::uint64_t seed);

/// The component histograms behind a perturbed pilot, first anchor = 0.
std::vector<HistogramEstimate> perturbed_histogram_components(const Sample& s,
                                                              const Eigen::VectorXd& widths,
                                                              double perturbation_fraction,
                                                              int count, std::uint64_t seed);

}  // namespace spe
