#include "spe/graphical.hpp"

#include <cmath>
#include <functional>
#include <memory>
#include <queue>
#include <stdexcept>

#include "spe/histogram.hpp"

namespace spe {

void GraphicalFactorization::validate(int d) const {
  if (static_cast<int>(factors.size()) != d)
    throw std::invalid_argument("GraphicalFactorization: need exactly one factor per variable");
  std::vector<int> seen(static_cast<std::size_t>(d), 0);
  for (const auto& f : factors) {
    if (f.target < 0 || f.target >= d)
      throw std::invalid_argument("GraphicalFactorization: target out of range");
    if (seen[static_cast<std::size_t>(f.target)]++)
      throw std::invalid_argument("GraphicalFactorization: variable is a target twice");
    for (int g : f.given) {
      if (g < 0 || g >= d)
        throw std::invalid_argument("GraphicalFactorization: conditioning variable out of range");
      if (g == f.target)
        throw std::invalid_argument("GraphicalFactorization: variable conditions on itself");
    }
  }
  topological_order(d);  // throws on a cycle
}

std::vector<int> GraphicalFactorization::topological_order(int d) const {
  // factor index by target variable
  std::vector<int> factor_of(static_cast<std::size_t>(d), -1);
  for (int i = 0; i < static_cast<int>(factors.size()); ++i)
    factor_of[static_cast<std::size_t>(factors[static_cast<std::size_t>(i)].target)] = i;

  std::vector<int> indeg(static_cast<std::size_t>(d), 0);
  std::vector<std::vector<int>> out(static_cast<std::size_t>(d));
  for (const auto& f : factors) {
    indeg[static_cast<std::size_t>(f.target)] = static_cast<int>(f.given.size());
    for (int g : f.given) out[static_cast<std::size_t>(g)].push_back(f.target);
  }
  std::priority_queue<int, std::vector<int>, std::greater<int>> ready;  // deterministic order
  for (int v = 0; v < d; ++v)
    if (indeg[static_cast<std::size_t>(v)] == 0) ready.push(v);
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(d));
  while (!ready.empty()) {
    int v = ready.top();
    ready.pop();
    order.push_back(factor_of[static_cast<std::size_t>(v)]);
    for (int w : out[static_cast<std::size_t>(v)])
      if (--indeg[static_cast<std::size_t>(w)] == 0) ready.push(w);
  }
  if (static_cast<int>(order.size()) != d)
    throw std::invalid_argument("GraphicalFactorization: conditioning structure has a cycle");
  return order;
}

GraphicalFactorization GraphicalFactorization::independent(int d) {
  GraphicalFactorization f;
  f.factors.resize(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) f.factors[static_cast<std::size_t>(j)].target = j;
  return f;
}

struct GraphicalHistogram::FactorTable {
  struct Cell {
    double total = 0.0;
    std::unordered_map<std::int64_t, double> counts;
  };
  std::unordered_map<BinIndex, Cell, BinIndexHash> cells;
};

namespace {
std::int64_t bin_of_coord(double y, double width) {
  return static_cast<std::int64_t>(std::floor(y / width));
}
}  // namespace

GraphicalHistogram::GraphicalHistogram(const Sample& s, GraphicalFactorization fact,
                                       Eigen::VectorXd widths)
    : fact_(std::move(fact)), widths_(std::move(widths)) {
  if (widths_.size() != s.d())
    throw std::invalid_argument("GraphicalHistogram: widths dimension mismatch");
  if (widths_.minCoeff() <= 0.0)
    throw std::invalid_argument("GraphicalHistogram: widths must be positive");
  fact_.validate(s.d());
  topo_ = fact_.topological_order(s.d());

  tables_.resize(fact_.factors.size());
  for (std::size_t fi = 0; fi < fact_.factors.size(); ++fi) {
    const auto& f = fact_.factors[fi];
    auto table = std::make_shared<FactorTable>();
    for (int i = 0; i < s.n(); ++i) {
      BinIndex key;
      key.reserve(f.given.size());
      for (int g : f.given) key.push_back(bin_of_coord(s.data(i, g), widths_[g]));
      auto& cell = table->cells[key];
      cell.total += 1.0;
      cell.counts[bin_of_coord(s.data(i, f.target), widths_[f.target])] += 1.0;
    }
    tables_[fi] = std::move(table);
  }
}

double GraphicalHistogram::operator()(const Eigen::VectorXd& y) const {
  if (y.size() != dim()) throw std::invalid_argument("GraphicalHistogram: dimension mismatch");
  double value = 1.0;
  for (std::size_t fi = 0; fi < fact_.factors.size(); ++fi) {
    const auto& f = fact_.factors[fi];
    BinIndex key;
    key.reserve(f.given.size());
    for (int g : f.given) key.push_back(bin_of_coord(y[g], widths_[g]));
    auto cell_it = tables_[fi]->cells.find(key);
    if (cell_it == tables_[fi]->cells.end()) return 0.0;  // empty conditioning cell
    const auto& cell = cell_it->second;
    auto cnt_it = cell.counts.find(bin_of_coord(y[f.target], widths_[f.target]));
    if (cnt_it == cell.counts.end()) return 0.0;
    value *= cnt_it->second / cell.total / widths_[f.target];
  }
  return value;
}

double GraphicalHistogram::accumulate_cells(bool squared) const {
  // Depth-first over factors in topological order; each leaf is one
  // populated cell of the product partition carrying probability
  // prod_f count/total. The cell volume is prod_j h_j.
  const double vol = widths_.prod();
  double acc = 0.0;
  std::vector<std::int64_t> assigned(static_cast<std::size_t>(dim()), 0);

  struct Frame {
    const GraphicalFactor* f;
    const FactorTable* table;
  };
  std::vector<Frame> frames;
  frames.reserve(topo_.size());
  for (int fi : topo_)
    frames.push_back({&fact_.factors[static_cast<std::size_t>(fi)],
                      tables_[static_cast<std::size_t>(fi)].get()});

  std::function<void(std::size_t, double)> rec = [&](std::size_t level, double prob) {
    if (level == frames.size()) {
      acc += squared ? prob * prob / vol : prob;
      return;
    }
    const auto& fr = frames[level];
    BinIndex key;
    key.reserve(fr.f->given.size());
    for (int g : fr.f->given) key.push_back(assigned[static_cast<std::size_t>(g)]);
    auto cell_it = fr.table->cells.find(key);
    if (cell_it == fr.table->cells.end()) return;
    const auto& cell = cell_it->second;
    for (const auto& [bin, count] : cell.counts) {
      assigned[static_cast<std::size_t>(fr.f->target)] = bin;
      rec(level + 1, prob * count / cell.total);
    }
  };
  rec(0, 1.0);
  return acc;
}

double GraphicalHistogram::integral() const { return accumulate_cells(false); }

double GraphicalHistogram::self_energy() const { return accumulate_cells(true); }

PilotDensity graphical_histogram_fit(const Sample& s, const GraphicalFactorization& fact,
                                     const Eigen::VectorXd& widths) {
  auto gh = std::make_shared<GraphicalHistogram>(s, fact, widths);
  double se = gh->self_energy();
  return PilotDensity(PilotKind::graphical_histogram, s.d(),
                      [gh](const Eigen::VectorXd& y) { return (*gh)(y); }, nullptr, se);
}

}  // namespace spe
