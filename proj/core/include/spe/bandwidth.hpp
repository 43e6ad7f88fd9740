#pragma once

#include <Eigen/Core>

#include "spe/sample.hpp"

namespace spe {

enum class BandwidthKind {
  iqr_quarter,    // c * IQR_j * n^{-1/4}
  iqr_2d,         // c * IQR_j * n^{-1/(2d)}
  lscv,           // grid-searched least-squares cross validation (see kde.hpp)
  undersmoothed,  // c * n^{-1/(2(l+1))} * sqrt(log log n) / log n
};

struct BandwidthRule {
  BandwidthKind kind = BandwidthKind::iqr_quarter;
  double c = 1.0;      // must be > 0
  int smoothness = 0;  // l, undersmoothed only
};

/// Quantile with linear interpolation between order statistics
/// (position p*(n-1), the common type-7 convention).
double interpolated_quantile(Eigen::VectorXd values, double p);

/// Per-coordinate histogram bin widths from the inter-quartile range.
/// Two published schedules coexist: iqr_quarter uses exponent -1/4 for any d,
/// iqr_2d uses -1/(2d); they coincide at d=2. Throws on a degenerate
/// coordinate (IQR == 0) and on non-IQR rule kinds.
Eigen::VectorXd iqr_binwidths(const Sample& s, const BandwidthRule& rule);

/// Undersmoothing schedule: c * n^{-1/(2(l+1))} * sqrt(log log n) / log n.
/// The 1/log n factor makes this a strict o(n^{-1/(2(l+1))} sqrt(log log n))
/// instance. Requires n >= 3 so log log n > 0.
double undersmoothed_bandwidth(int n, int ell, double c);

}  // namespace spe
