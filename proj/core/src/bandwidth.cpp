#include "spe/bandwidth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace spe {

double interpolated_quantile(Eigen::VectorXd values, double p) {
  if (values.size() < 1) throw std::invalid_argument("interpolated_quantile: empty input");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("interpolated_quantile: p outside [0,1]");
  std::vector<double> v(values.data(), values.data() + values.size());
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

Eigen::VectorXd iqr_binwidths(const Sample& s, const BandwidthRule& rule) {
  if (!(rule.c > 0.0)) throw std::invalid_argument("iqr_binwidths: c must be > 0");
  double exponent;
  switch (rule.kind) {
    case BandwidthKind::iqr_quarter:
      exponent = -0.25;
      break;
    case BandwidthKind::iqr_2d:
      exponent = -1.0 / (2.0 * static_cast<double>(s.d()));
      break;
    default:
      throw std::invalid_argument("iqr_binwidths: rule kind must be iqr_quarter or iqr_2d");
  }
  const double scale = std::pow(static_cast<double>(s.n()), exponent);
  Eigen::VectorXd widths(s.d());
  for (int j = 0; j < s.d(); ++j) {
    double iqr = interpolated_quantile(s.data.col(j), 0.75) -
                 interpolated_quantile(s.data.col(j), 0.25);
    if (!(iqr > 0.0))
      throw std::invalid_argument("iqr_binwidths: degenerate coordinate " + std::to_string(j) +
                                  " (IQR = 0)");
    widths[j] = rule.c * iqr * scale;
  }
  return widths;
}

double undersmoothed_bandwidth(int n, int ell, double c) {
  if (n < 3) throw std::invalid_argument("undersmoothed_bandwidth: need n >= 3");
  if (ell < 0) throw std::invalid_argument("undersmoothed_bandwidth: need ell >= 0");
  if (!(c > 0.0)) throw std::invalid_argument("undersmoothed_bandwidth: need c > 0");
  const double nn = static_cast<double>(n);
  return c * std::pow(nn, -1.0 / (2.0 * (ell + 1))) * std::sqrt(std::log(std::log(nn))) /
         std::log(nn);
}

}  // namespace spe
