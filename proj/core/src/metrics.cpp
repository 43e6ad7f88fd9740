#include "spe/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "spe/io.hpp"
#include "spe/kde.hpp"
#include "spe/rng.hpp"

namespace spe {

double ise_grid(const DensityFn& f_hat, const DensityFn& f_true, const EvalGrid& grid,
                IseGridDiag* diag) {
  double acc = 0.0;
  double hb = 0.0, tb = 0.0;
  for (std::size_t r = 0; r < grid.size(); ++r) {
    Eigen::VectorXd x = grid.points.row(static_cast<Eigen::Index>(r)).transpose();
    const double a = f_hat(x);
    const double b = f_true(x);
    acc += (a - b) * (a - b);
    if (grid.is_boundary(r)) {
      hb += a;
      tb += b;
    }
  }
  if (diag) {
    diag->f_hat_boundary_mass = hb * grid.cell_volume;
    diag->f_true_boundary_mass = tb * grid.cell_volume;
    diag->boundary_warning =
        diag->f_hat_boundary_mass > 1e-3 || diag->f_true_boundary_mass > 1e-3;
  }
  return acc * grid.cell_volume;
}

double mixture_self_energy(const GaussianMixture& m) {
  const int S = m.S();
  const int d = m.dim();
  const double var = 2.0 * m.qbar();
  const double norm_const = std::pow(2.0 * std::numbers::pi * var, -0.5 * d);
  double acc = 0.0;
  for (int a = 0; a < S; ++a) {
    for (int b = a; b < S; ++b) {
      double sq = (m.means().row(a) - m.means().row(b)).squaredNorm();
      double term = m.weights()[a] * m.weights()[b] * norm_const * std::exp(-sq / (2.0 * var));
      acc += (a == b) ? term : 2.0 * term;
    }
  }
  return acc;
}

McEstimate ise_mc_density(const DensityFn& f_hat, double f_hat_self_energy,
                          double f0_self_energy, const SamplerFn& f_true_sampler, int count,
                          std::uint64_t seed) {
  if (count < 2) throw std::invalid_argument("ise_mc: need count >= 2");
  Eigen::MatrixXd draws = f_true_sampler(count, seed);
  if (draws.rows() != count) throw std::runtime_error("ise_mc: sampler returned wrong count");
  // cross term -2 E0[fhat]; everything else is exact
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < count; ++i) {
    const double v = f_hat(draws.row(i).transpose());
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / count;
  const double var = std::max(0.0, (sumsq - count * mean * mean) / (count - 1));
  McEstimate out;
  out.value = f_hat_self_energy + f0_self_energy - 2.0 * mean;
  out.stderr_value = 2.0 * std::sqrt(var / count);
  return out;
}

McEstimate ise_mc(const GaussianMixture& f_hat, const DensityFn& f_true, double f0_self_energy,
                  const SamplerFn& f_true_sampler, int count, std::uint64_t seed) {
  (void)f_true;  // the truth enters through its exact self-energy and sampler
  return ise_mc_density([&f_hat](const Eigen::VectorXd& x) { return f_hat(x); },
                        mixture_self_energy(f_hat), f0_self_energy, f_true_sampler, count, seed);
}

double sup_cdf_distance(const PilotDensity& pilot, const Sample& s,
                        const std::vector<Eigen::VectorXd>& probe_points) {
  if (pilot.kind() != PilotKind::histogram && pilot.kind() != PilotKind::kde)
    throw std::invalid_argument("sup_cdf_distance: pilot kind " + pilot_kind_name(pilot.kind()) +
                                " has no closed-form CDF");
  if (!pilot.has_cdf()) throw std::invalid_argument("sup_cdf_distance: pilot lacks a CDF");

  std::vector<Eigen::VectorXd> probes = probe_points;
  if (probes.empty()) {
    probes.reserve(static_cast<std::size_t>(s.n()));
    for (int i = 0; i < s.n(); ++i) probes.push_back(s.row(i));
  }

  const int n = s.n();
  double best = 0.0;
  for (const auto& t : probes) {
    int leq = 0, lt = 0;
    for (int i = 0; i < n; ++i) {
      bool all_leq = true, all_lt = true;
      for (int j = 0; j < s.d(); ++j) {
        all_leq = all_leq && s.data(i, j) <= t[j];
        all_lt = all_lt && s.data(i, j) < t[j];
      }
      leq += all_leq;
      lt += all_lt;
    }
    const double fp = pilot.cdf(t);
    best = std::max(best, std::abs(fp - static_cast<double>(leq) / n));
    best = std::max(best, std::abs(fp - static_cast<double>(lt) / n));
  }
  return best;
}

double mass_in_box(const GaussianMixture& m, const Eigen::VectorXd& lo,
                   const Eigen::VectorXd& hi) {
  if (lo.size() != m.dim() || hi.size() != m.dim())
    throw std::invalid_argument("mass_in_box: dimension mismatch");
  const double sd = std::sqrt(m.qbar());
  double acc = 0.0;
  for (int s = 0; s < m.S(); ++s) {
    double prod = 1.0;
    for (int j = 0; j < m.dim(); ++j) {
      double mu = m.means()(s, j);
      prod *= normal_cdf((hi[j] - mu) / sd) - normal_cdf((lo[j] - mu) / sd);
    }
    acc += m.weights()[s] * prod;
  }
  return acc;
}

McEstimate mass_in_ball(const GaussianMixture& m, const Eigen::VectorXd& center, double radius,
                        int count, std::uint64_t seed) {
  if (count < 2) throw std::invalid_argument("mass_in_ball: need count >= 2");
  Sample draws = m.sample(count, seed);
  int hits = 0;
  for (int i = 0; i < count; ++i)
    if ((draws.row(i) - center).norm() <= radius) ++hits;
  const double p = static_cast<double>(hits) / count;
  return McEstimate{p, std::sqrt(std::max(p * (1.0 - p), 1e-12) / count)};
}

RegionCells density_upper_level_cells(const DensityFn& f_true, const EvalGrid& grid,
                                      double target_mass) {
  if (!(target_mass > 0.0 && target_mass < 1.0))
    throw std::invalid_argument("density_upper_level_cells: target_mass outside (0,1)");
  const std::size_t count = grid.size();
  std::vector<double> vals(count);
  for (std::size_t r = 0; r < count; ++r)
    vals[r] = f_true(grid.points.row(static_cast<Eigen::Index>(r)).transpose());
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return vals[a] > vals[b]; });

  const int d = grid.dim();
  Eigen::VectorXd half(d);
  for (int j = 0; j < d; ++j) half[j] = 0.5 * (grid.breakpoints[static_cast<std::size_t>(j)][1] -
                                               grid.breakpoints[static_cast<std::size_t>(j)][0]);
  RegionCells region;
  for (std::size_t k = 0; k < count && region.true_mass < target_mass; ++k) {
    const std::size_t r = order[k];
    Eigen::VectorXd mid = grid.points.row(static_cast<Eigen::Index>(r)).transpose();
    region.boxes.emplace_back(mid - half, mid + half);
    region.true_mass += vals[r] * grid.cell_volume;
  }
  return region;
}

double mass_in_cells(const GaussianMixture& m, const RegionCells& region) {
  double acc = 0.0;
  for (const auto& [lo, hi] : region.boxes) acc += mass_in_box(m, lo, hi);
  return acc;
}

std::string IseReport::to_csv() const {
  std::ostringstream out;
  out << "scenario,method,n,seed,ise,sqrt_ise,wall_ms\n";
  for (const auto& r : records)
    out << r.scenario << ',' << r.method << ',' << r.n << ',' << r.seed << ','
        << format_double(r.ise) << ',' << format_double(std::sqrt(std::max(r.ise, 0.0))) << ','
        << format_double(r.wall_ms) << '\n';
  return out.str();
}

double median_of(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median_of: empty input");
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

std::vector<IseAggregate> IseReport::aggregate() const {
  std::map<std::tuple<std::string, std::string, int>, std::vector<double>> groups;
  for (const auto& r : records) groups[{r.scenario, r.method, r.n}].push_back(r.ise);
  std::vector<IseAggregate> out;
  for (const auto& [key, vals] : groups) {
    IseAggregate a;
    a.scenario = std::get<0>(key);
    a.method = std::get<1>(key);
    a.n = std::get<2>(key);
    a.reps = static_cast<int>(vals.size());
    a.mean = std::accumulate(vals.begin(), vals.end(), 0.0) / vals.size();
    a.median = median_of(vals);
    double ss = 0.0;
    for (double v : vals) ss += (v - a.mean) * (v - a.mean);
    a.variance = vals.size() > 1 ? ss / (vals.size() - 1) : 0.0;
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace spe
