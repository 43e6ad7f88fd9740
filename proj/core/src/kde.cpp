#include "spe/kde.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>

namespace spe {

namespace {

// N(0, sigma^2) density at u
double gauss(double u, double sigma) {
  return std::exp(-0.5 * (u / sigma) * (u / sigma)) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

void check_h(double h) {
  if (!(h > 0.0)) throw std::invalid_argument("kde: bandwidth must be > 0");
}

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double kde_evaluate(const Sample& s, double h, const Eigen::VectorXd& x) {
  check_h(h);
  if (x.size() != s.d()) throw std::invalid_argument("kde_evaluate: dimension mismatch");
  double acc = 0.0;
  for (int i = 0; i < s.n(); ++i) {
    double prod = 1.0;
    for (int j = 0; j < s.d(); ++j) prod *= gauss(x[j] - s.data(i, j), h);
    acc += prod;
  }
  return acc / static_cast<double>(s.n());
}

double kde_cdf(const Sample& s, double h, const Eigen::VectorXd& t) {
  check_h(h);
  if (t.size() != s.d()) throw std::invalid_argument("kde_cdf: dimension mismatch");
  double acc = 0.0;
  for (int i = 0; i < s.n(); ++i) {
    double prod = 1.0;
    for (int j = 0; j < s.d(); ++j) prod *= normal_cdf((t[j] - s.data(i, j)) / h);
    acc += prod;
  }
  return acc / static_cast<double>(s.n());
}

double kde_self_energy(const Sample& s, double h) {
  check_h(h);
  const double sigma = h * std::numbers::sqrt2;
  const int n = s.n();
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int k = i; k < n; ++k) {
      double prod = 1.0;
      for (int j = 0; j < s.d(); ++j) prod *= gauss(s.data(i, j) - s.data(k, j), sigma);
      acc += (k == i) ? prod : 2.0 * prod;
    }
  }
  return acc / (static_cast<double>(n) * static_cast<double>(n));
}

double lscv_score(const Sample& s, double h) {
  check_h(h);
  const int n = s.n();
  if (n < 2) throw std::invalid_argument("lscv_score: need n >= 2 for leave-one-out");
  // leave-one-out term: (1/n) sum_i fhat_{-i}(Y_i)
  //                   = (1/(n(n-1))) sum_{i != k} prod_j phi_h(Y_ij - Y_kj)
  double loo = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int k = i + 1; k < n; ++k) {
      double prod = 1.0;
      for (int j = 0; j < s.d(); ++j) prod *= gauss(s.data(i, j) - s.data(k, j), h);
      loo += 2.0 * prod;
    }
  }
  loo /= static_cast<double>(n) * static_cast<double>(n - 1);
  return kde_self_energy(s, h) - 2.0 * loo;
}

double lscv_bandwidth(const Sample& s, const std::vector<double>& search_grid) {
  if (search_grid.empty()) throw std::invalid_argument("lscv_bandwidth: empty search grid");
  double best_h = 0.0;
  double best_cv = std::numeric_limits<double>::infinity();
  for (double h : search_grid) {
    check_h(h);
    double cv = lscv_score(s, h);
    // strict improvement, or equal score at smaller h
    if (cv < best_cv || (cv == best_cv && h < best_h)) {
      best_cv = cv;
      best_h = h;
    }
  }
  return best_h;
}

std::vector<double> default_lscv_grid(const Sample& s) {
  const int n = s.n();
  const int d = s.d();
  double log_gm = 0.0;
  for (int j = 0; j < d; ++j) {
    double mean = s.data.col(j).mean();
    double var = (s.data.col(j).array() - mean).square().sum() / std::max(1, n - 1);
    if (!(var > 0.0)) throw std::invalid_argument("default_lscv_grid: degenerate coordinate");
    log_gm += 0.5 * std::log(var);
  }
  double scott = std::exp(log_gm / d) * std::pow(static_cast<double>(n), -1.0 / (d + 4));
  std::vector<double> grid;
  const int count = 30;
  const double lo = std::log(0.05 * scott), hi = std::log(2.0 * scott);
  for (int i = 0; i < count; ++i)
    grid.push_back(std::exp(lo + (hi - lo) * static_cast<double>(i) / (count - 1)));
  return grid;
}

PilotDensity kde_pilot(const Sample& s, double h) {
  check_h(h);
  auto data = std::make_shared<Sample>(s);
  double se = kde_self_energy(s, h);
  return PilotDensity(
      PilotKind::kde, s.d(),
      [data, h](const Eigen::VectorXd& x) { return kde_evaluate(*data, h, x); },
      [data, h](const Eigen::VectorXd& t) { return kde_cdf(*data, h, t); }, se);
}

}  // namespace spe
