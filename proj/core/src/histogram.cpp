#include "spe/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "spe/rng.hpp"

namespace spe {

BinIndex HistogramEstimate::bin_of(const Eigen::VectorXd& x) const {
  BinIndex idx(static_cast<std::size_t>(dim()));
  for (int j = 0; j < dim(); ++j)
    idx[static_cast<std::size_t>(j)] =
        static_cast<std::int64_t>(std::floor((x[j] - anchor[j]) / widths[j]));
  return idx;
}

HistogramEstimate histogram_fit(const Sample& s, const Eigen::VectorXd& widths,
                                const Eigen::VectorXd& anchor) {
  if (widths.size() != s.d() || anchor.size() != s.d())
    throw std::invalid_argument("histogram_fit: widths/anchor dimension mismatch");
  if (widths.minCoeff() <= 0.0)
    throw std::invalid_argument("histogram_fit: widths must be positive");

  HistogramEstimate h;
  h.anchor = anchor;
  h.widths = widths;
  h.n = s.n();
  // count first, divide once: bin masses are exact multiples of 1/n
  for (int i = 0; i < s.n(); ++i) h.bins[h.bin_of(s.row(i))] += 1.0;
  for (auto& [idx, mass] : h.bins) mass /= static_cast<double>(s.n());
  return h;
}

double histogram_evaluate(const HistogramEstimate& h, const Eigen::VectorXd& x) {
  if (x.size() != h.dim()) throw std::invalid_argument("histogram_evaluate: dimension mismatch");
  auto it = h.bins.find(h.bin_of(x));
  if (it == h.bins.end()) return 0.0;
  return it->second / h.bin_volume();
}

double histogram_cdf(const HistogramEstimate& h, const Eigen::VectorXd& t) {
  if (t.size() != h.dim()) throw std::invalid_argument("histogram_cdf: dimension mismatch");
  double acc = 0.0;
  for (const auto& [idx, mass] : h.bins) {
    double frac = mass;
    for (int j = 0; j < h.dim() && frac != 0.0; ++j) {
      double lo = h.anchor[j] + static_cast<double>(idx[static_cast<std::size_t>(j)]) * h.widths[j];
      double c = (t[j] - lo) / h.widths[j];
      frac *= std::clamp(c, 0.0, 1.0);
    }
    acc += frac;
  }
  return acc;
}

double histogram_self_energy(const HistogramEstimate& h) {
  double acc = 0.0;
  for (const auto& [idx, mass] : h.bins) acc += mass * mass;
  return acc / h.bin_volume();
}

PilotDensity histogram_pilot(HistogramEstimate h) {
  auto shared = std::make_shared<HistogramEstimate>(std::move(h));
  double se = histogram_self_energy(*shared);
  return PilotDensity(
      PilotKind::histogram, shared->dim(),
      [shared](const Eigen::VectorXd& x) { return histogram_evaluate(*shared, x); },
      [shared](const Eigen::VectorXd& t) { return histogram_cdf(*shared, t); }, se);
}

std::vector<HistogramEstimate> perturbed_histogram_components(const Sample& s,
                                                              const Eigen::VectorXd& widths,
                                                              double perturbation_fraction,
                                                              int count, std::uint64_t seed) {
  if (count < 2) throw std::invalid_argument("perturbed_histogram_fit: count must be >= 2");
  if (!(perturbation_fraction >= 0.0 && perturbation_fraction < 1.0))
    throw std::invalid_argument("perturbed_histogram_fit: perturbation_fraction outside [0, 1)");

  std::vector<HistogramEstimate> parts;
  parts.reserve(static_cast<std::size_t>(count));
  parts.push_back(histogram_fit(s, widths, Eigen::VectorXd::Zero(s.d())));
  for (int k = 1; k < count; ++k) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
    Eigen::VectorXd anchor(s.d());
    for (int j = 0; j < s.d(); ++j)
      anchor[j] = rng.uniform(-perturbation_fraction * widths[j], perturbation_fraction * widths[j]);
    parts.push_back(histogram_fit(s, widths, anchor));
  }
  return parts;
}

PilotDensity perturbed_histogram_fit(const Sample& s, const Eigen::VectorXd& widths,
                                     double perturbation_fraction, int count,
                                     std::uint64_t seed) {
  auto parts = std::make_shared<std::vector<HistogramEstimate>>(
      perturbed_histogram_components(s, widths, perturbation_fraction, count, seed));
  const double inv = 1.0 / static_cast<double>(parts->size());
  return PilotDensity(PilotKind::perturbed_histogram, s.d(),
                      [parts, inv](const Eigen::VectorXd& x) {
                        double acc = 0.0;
                        for (const auto& h : *parts) acc += histogram_evaluate(h, x);
                        return acc * inv;
                      });
}

}  // namespace spe
