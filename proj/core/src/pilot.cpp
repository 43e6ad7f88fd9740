#include "spe/pilot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <stdexcept>
#include <vector>

#include "spe/io.hpp"

namespace spe {

std::string pilot_kind_name(PilotKind k) {
  switch (k) {
    case PilotKind::histogram: return "histogram";
    case PilotKind::perturbed_histogram: return "perturbed-histogram";
    case PilotKind::graphical_histogram: return "graphical-histogram";
    case PilotKind::kde: return "kde";
    case PilotKind::tabulated: return "tabulated";
  }
  return "?";
}

double PilotDensity::cdf(const Eigen::VectorXd& t) const {
  if (!cdf_) throw std::logic_error("PilotDensity: no closed-form CDF for kind " +
                                    pilot_kind_name(kind_));
  return cdf_(t);
}

namespace {

// regular grid of tabulated density values with multilinear interpolation
struct TabulatedGrid {
  std::vector<std::vector<double>> coords;  // per dim, strictly increasing
  std::vector<double> values;               // row-major, last dim fastest
  int d = 0;

  double interpolate(const Eigen::VectorXd& x) const {
    std::vector<int> cell(static_cast<std::size_t>(d));
    std::vector<double> frac(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
      const auto& c = coords[static_cast<std::size_t>(j)];
      if (x[j] < c.front() || x[j] > c.back()) return 0.0;
      auto it = std::upper_bound(c.begin(), c.end(), x[j]);
      int hi = static_cast<int>(it - c.begin());
      hi = std::clamp(hi, 1, static_cast<int>(c.size()) - 1);
      cell[static_cast<std::size_t>(j)] = hi - 1;
      frac[static_cast<std::size_t>(j)] = (x[j] - c[hi - 1]) / (c[hi] - c[hi - 1]);
    }
    // blend the 2^d corner values
    double acc = 0.0;
    const int corners = 1 << d;
    for (int mask = 0; mask < corners; ++mask) {
      double w = 1.0;
      std::size_t flat = 0;
      for (int j = 0; j < d; ++j) {
        int offset = (mask >> j) & 1;
        w *= offset ? frac[static_cast<std::size_t>(j)] : 1.0 - frac[static_cast<std::size_t>(j)];
        flat = flat * coords[static_cast<std::size_t>(j)].size() +
               static_cast<std::size_t>(cell[static_cast<std::size_t>(j)] + offset);
      }
      acc += w * values[flat];
    }
    return std::max(acc, 0.0);
  }
};

}  // namespace

PilotDensity load_tabulated_pilot_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open tabulated pilot CSV: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": missing header");
  auto header = split_csv_line(line);
  const int d = static_cast<int>(header.size()) - 1;
  if (d < 1 || header.back() != "density")
    throw std::runtime_error(path + ": header must be x1,...,xd,density");
  for (int j = 0; j < d; ++j)
    if (header[static_cast<std::size_t>(j)] != "x" + std::to_string(j + 1))
      throw std::runtime_error(path + ": header must be x1,...,xd,density");

  std::vector<std::vector<double>> pts;
  std::vector<double> vals;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != d + 1)
      throw std::runtime_error(path + ": wrong field count at line " + std::to_string(lineno));
    std::vector<double> row(static_cast<std::size_t>(d));
    try {
      for (int j = 0; j < d; ++j) row[static_cast<std::size_t>(j)] = std::stod(fields[static_cast<std::size_t>(j)]);
      vals.push_back(std::stod(fields[static_cast<std::size_t>(d)]));
    } catch (const std::exception&) {
      throw std::runtime_error(path + ": parse error at line " + std::to_string(lineno));
    }
    if (vals.back() < 0.0)
      throw std::runtime_error(path + ": negative density at line " + std::to_string(lineno));
    pts.push_back(std::move(row));
  }
  if (pts.empty()) throw std::runtime_error(path + ": no data rows");

  auto grid = std::make_shared<TabulatedGrid>();
  grid->d = d;
  grid->coords.resize(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    std::vector<double> c;
    for (const auto& p : pts) c.push_back(p[static_cast<std::size_t>(j)]);
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    if (c.size() < 2) throw std::runtime_error(path + ": coordinate x" + std::to_string(j + 1) +
                                               " needs at least 2 distinct values");
    // monotone by construction after sort; verify regular spacing
    const double step = c[1] - c[0];
    for (std::size_t k = 1; k + 1 < c.size(); ++k)
      if (std::abs((c[k + 1] - c[k]) - step) > 1e-9 * std::max(1.0, std::abs(step)))
        throw std::runtime_error(path + ": coordinate x" + std::to_string(j + 1) +
                                 " is not a regular grid");
    grid->coords[static_cast<std::size_t>(j)] = std::move(c);
  }
  std::size_t expected = 1;
  for (const auto& c : grid->coords) expected *= c.size();
  if (pts.size() != expected)
    throw std::runtime_error(path + ": row count does not fill the coordinate grid");

  // scatter rows into row-major order (last dim fastest)
  grid->values.assign(expected, -1.0);
  for (std::size_t r = 0; r < pts.size(); ++r) {
    std::size_t flat = 0;
    for (int j = 0; j < d; ++j) {
      const auto& c = grid->coords[static_cast<std::size_t>(j)];
      auto it = std::lower_bound(c.begin(), c.end(), pts[r][static_cast<std::size_t>(j)]);
      flat = flat * c.size() + static_cast<std::size_t>(it - c.begin());
    }
    if (grid->values[flat] >= 0.0) throw std::runtime_error(path + ": duplicate grid point");
    grid->values[flat] = vals[r];
  }

  return PilotDensity(PilotKind::tabulated, d,
                      [grid](const Eigen::VectorXd& x) { return grid->interpolate(x); });
}

}  // namespace spe
