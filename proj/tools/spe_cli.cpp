// Command line front end: fits single estimators, runs the Monte-Carlo
// benchmark sweeps, the direct-projection demonstrations, and the WDBC
// classification experiment. Emits CSV/JSON only; plotting happens
// elsewhere.
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "spe/bandwidth.hpp"
#include "spe/classifier.hpp"
#include "spe/datagen.hpp"
#include "spe/em.hpp"
#include "spe/graphical.hpp"
#include "spe/histogram.hpp"
#include "spe/io.hpp"
#include "spe/kde.hpp"
#include "spe/metrics.hpp"
#include "spe/mixture.hpp"
#include "spe/parallel.hpp"
#include "spe/pilot.hpp"
#include "spe/projection.hpp"
#include "spe/rng.hpp"
#include "spe/sample.hpp"

namespace {

using namespace spe;
using nlohmann::json;

struct EstimatorParams {
  int S = 36;
  double qbar = 0.7;
  double width_c = 1.0;
  double penalty = 0.0;
  double perturb_frac = 0.45;
  int perturb_count = 5;
};

Eigen::VectorXd pilot_widths(const Sample& s, double c) {
  BandwidthKind kind = s.d() <= 2 ? BandwidthKind::iqr_quarter : BandwidthKind::iqr_2d;
  return iqr_binwidths(s, BandwidthRule{kind, c, 0});
}

struct Fitted {
  DensityFn eval;
  std::optional<double> self_energy;
  std::optional<GaussianMixture> mixture;
  std::optional<HistogramEstimate> histogram;
};

PilotDensity fit_pilot(const std::string& kind, const TrueDensity& truth, const Sample& s,
                       const EstimatorParams& p, std::uint64_t seed) {
  if (kind == "hist")
    return histogram_pilot(histogram_fit(s, pilot_widths(s, p.width_c),
                                         Eigen::VectorXd::Zero(s.d())));
  if (kind == "phist")
    return perturbed_histogram_fit(s, pilot_widths(s, p.width_c), p.perturb_frac,
                                   p.perturb_count, derive_seed(seed, 0x9e77));
  if (kind == "ghist") {
    if (!truth.factorization)
      throw std::invalid_argument("method ghist needs a scenario with a factorization (ggm5)");
    return graphical_histogram_fit(s, *truth.factorization, pilot_widths(s, p.width_c));
  }
  if (kind == "kde-cv") {
    double h = lscv_bandwidth(s, default_lscv_grid(s));
    return kde_pilot(s, h);
  }
  throw std::invalid_argument("unknown pilot kind: " + kind);
}

Fitted fit_method(const std::string& method, const TrueDensity& truth, const Sample& s,
                  const EstimatorParams& p, std::uint64_t seed) {
  Fitted out;
  if (method == "hist" || method == "phist" || method == "ghist" || method == "kde-cv") {
    auto pilot = std::make_shared<PilotDensity>(fit_pilot(method, truth, s, p, seed));
    out.eval = [pilot](const Eigen::VectorXd& x) { return (*pilot)(x); };
    out.self_energy = pilot->self_energy();
    if (method == "hist")
      out.histogram = histogram_fit(s, pilot_widths(s, p.width_c), Eigen::VectorXd::Zero(s.d()));
    return out;
  }
  if (method == "em") {
    EmConfig cfg{p.S, p.qbar, 500, 1e-8, derive_seed(seed, 0xe3)};
    auto res = em_spherical(s, cfg);
    auto mix = std::make_shared<GaussianMixture>(std::move(res.mixture));
    out.eval = [mix](const Eigen::VectorXd& x) { return (*mix)(x); };
    out.self_energy = mixture_self_energy(*mix);
    out.mixture = *mix;
    return out;
  }
  if (method.rfind("spe-", 0) == 0) {
    auto pilot = fit_pilot(method.substr(4), truth, s, p, seed);
    ProjectionConfig cfg;
    cfg.S = p.S;
    cfg.qbar = p.qbar;
    cfg.box_M = default_box_halfwidth(s, p.qbar);
    cfg.penalty_weight = p.penalty;
    auto res = p.penalty > 0.0 ? penalized_project(pilot, s, cfg) : project(pilot, s, cfg);
    auto mix = std::make_shared<GaussianMixture>(std::move(res.mixture));
    out.eval = [mix](const Eigen::VectorXd& x) { return (*mix)(x); };
    out.self_energy = mixture_self_energy(*mix);
    out.mixture = *mix;
    return out;
  }
  if (method == "direct") {
    ProjectionConfig cfg;
    cfg.S = p.S;
    cfg.qbar = p.qbar;
    cfg.box_M = default_box_halfwidth(s, p.qbar);
    auto res = direct_project(s, cfg);
    auto mix = std::make_shared<GaussianMixture>(std::move(res.mixture));
    out.eval = [mix](const Eigen::VectorXd& x) { return (*mix)(x); };
    out.self_energy = mixture_self_energy(*mix);
    out.mixture = *mix;
    return out;
  }
  throw std::invalid_argument("unknown method: " + method);
}

// per-scenario evaluation box for grid ISE (d <= 2)
void scenario_box(const std::string& label, Eigen::VectorXd& lo, Eigen::VectorXd& hi) {
  lo.resize(2);
  hi.resize(2);
  if (label == "normal-mix") {
    lo << -13.0, -6.0;
    hi << 11.0, 10.0;
  } else if (label == "gamma-indep") {
    lo << -3.0, -3.0;
    hi << 16.0, 16.0;
  } else if (label == "ring") {
    lo << -10.0, -10.0;
    hi << 10.0, 10.0;
  } else {
    throw std::invalid_argument("no grid box for scenario " + label);
  }
}

// caches the truth values on the ISE grid once per (scenario, grid) pair
struct IseContext {
  TrueDensity truth;
  EvalGrid grid;
  std::vector<double> f0;
  int mc_count = 100000;

  explicit IseContext(TrueDensity t, int cells = 256) : truth(std::move(t)) {
    if (truth.dim <= 2) {
      Eigen::VectorXd lo, hi;
      scenario_box(truth.label, lo, hi);
      grid = EvalGrid::regular(lo, hi, cells);
      f0.resize(grid.size());
      for (std::size_t r = 0; r < grid.size(); ++r)
        f0[r] = truth.density(grid.points.row(static_cast<Eigen::Index>(r)).transpose());
    }
  }

  double ise(const Fitted& fit, std::uint64_t seed) const {
    if (truth.dim <= 2) {
      double acc = 0.0;
      for (std::size_t r = 0; r < grid.size(); ++r) {
        double a = fit.eval(grid.points.row(static_cast<Eigen::Index>(r)).transpose());
        acc += (a - f0[r]) * (a - f0[r]);
      }
      return acc * grid.cell_volume;
    }
    if (!fit.self_energy)
      throw std::invalid_argument("MC ISE in d >= 3 needs a closed-form self-energy");
    return ise_mc_density(fit.eval, *fit.self_energy, truth.self_energy, truth.sample, mc_count,
                          derive_seed(seed, 0x15e)).value;
  }
};

std::string grid_eval_csv(const DensityFn& f, const EvalGrid& grid) {
  std::ostringstream out;
  out << (grid.dim() == 1 ? "x1,density" : "x1,x2,density") << '\n';
  for (std::size_t r = 0; r < grid.size(); ++r) {
    Eigen::VectorXd x = grid.points.row(static_cast<Eigen::Index>(r)).transpose();
    for (int j = 0; j < grid.dim(); ++j) out << format_double(x[j]) << ',';
    out << format_double(f(x)) << '\n';
  }
  return out.str();
}

std::string histogram_json(const HistogramEstimate& h) {
  json j;
  j["anchor"] = std::vector<double>(h.anchor.data(), h.anchor.data() + h.anchor.size());
  j["widths"] = std::vector<double>(h.widths.data(), h.widths.data() + h.widths.size());
  j["n"] = h.n;
  std::vector<std::pair<BinIndex, double>> sorted(h.bins.begin(), h.bins.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  json bins = json::array();
  for (const auto& [idx, mass] : sorted) bins.push_back({{"index", idx}, {"mass", mass}});
  j["bins"] = bins;
  return j.dump(2);
}

// ---------------------------------------------------------------------------

int cmd_fit(const std::string& scenario, const std::string& input_csv, int n,
            const std::string& estimator, const EstimatorParams& params, std::uint64_t seed,
            const std::string& out_dir, int grid_cells, bool write_trace) {
  Sample s = input_csv.empty() ? Sample{scenario_by_name(scenario).sample(n, seed)}
                               : load_sample_csv(input_csv);
  TrueDensity truth = input_csv.empty() ? scenario_by_name(scenario)
                                        : TrueDensity{"custom", s.d(), nullptr, nullptr, 0.0, {}};

  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  if (estimator.rfind("spe-", 0) == 0 || estimator == "direct") {
    // keep the trace by running the projection explicitly
    ProjectionConfig cfg;
    cfg.S = params.S;
    cfg.qbar = params.qbar;
    cfg.box_M = default_box_halfwidth(s, params.qbar);
    cfg.penalty_weight = params.penalty;
    ProjectionResult res =
        estimator == "direct"
            ? direct_project(s, cfg)
            : (params.penalty > 0.0
                   ? penalized_project(fit_pilot(estimator.substr(4), truth, s, params, seed), s, cfg)
                   : project(fit_pilot(estimator.substr(4), truth, s, params, seed), s, cfg));
    atomic_write_text(out_dir + "/mixture.json", mixture_to_json(res.mixture));
    if (write_trace) atomic_write_text(out_dir + "/trace.csv", res.trace.to_csv());
    if (s.d() <= 2) {
      EvalGrid grid = EvalGrid::regular(
          s.data.colwise().minCoeff().transpose().array() - 1.0,
          s.data.colwise().maxCoeff().transpose().array() + 1.0, grid_cells);
      atomic_write_text(out_dir + "/grid.csv", grid_eval_csv(
          [&](const Eigen::VectorXd& x) { return res.mixture(x); }, grid));
    }
    return 0;
  }

  Fitted fit = fit_method(estimator, truth, s, params, seed);
  if (fit.mixture) atomic_write_text(out_dir + "/mixture.json", mixture_to_json(*fit.mixture));
  if (fit.histogram) atomic_write_text(out_dir + "/histogram.json", histogram_json(*fit.histogram));
  if (s.d() <= 2) {
    EvalGrid grid = EvalGrid::regular(
        s.data.colwise().minCoeff().transpose().array() - 1.0,
        s.data.colwise().maxCoeff().transpose().array() + 1.0, grid_cells);
    atomic_write_text(out_dir + "/grid.csv", grid_eval_csv(fit.eval, grid));
  }
  return 0;
}

struct BenchCell {
  std::string method;
  int n = 0;
  double width_c = 1.0;
  double qbar = 0.7;
};

int cmd_benchmark(const std::string& scenario, std::vector<int> n_list,
                  std::vector<std::string> methods, int reps, std::uint64_t seed,
                  const std::string& out_dir, const std::string& sweep, EstimatorParams params,
                  bool paper_scale, int threads, bool dry_run) {
  if (paper_scale) {
    reps = 1000;
    if (sweep.empty() && n_list.size() == 1) n_list = {50, 100, 250, 500};
    if (!sweep.empty()) reps = 100;  // the published sweep protocol uses 100 draws
  }

  std::vector<BenchCell> cells;
  if (sweep.empty()) {
    for (const auto& m : methods)
      for (int n : n_list) cells.push_back({m, n, params.width_c, params.qbar});
  } else if (sweep == "c") {
    for (int i = 0; i < 40; ++i) {
      double c = 0.05 + 0.05 * i;
      for (const auto& m : methods) cells.push_back({m, n_list.front(), c, params.qbar});
    }
  } else if (sweep == "c-qbar") {
    for (int i = 0; i < 40; ++i) {
      for (int k = 0; k < 33; ++k) {
        double c = 0.05 + 0.05 * i;
        double q = 0.4 + 0.05 * k;
        for (const auto& m : methods) cells.push_back({m, n_list.front(), c, q});
      }
    }
  } else {
    throw std::invalid_argument("unknown sweep kind: " + sweep + " (expected c or c-qbar)");
  }

  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  if (dry_run) {
    json plan = json::array();
    for (const auto& c : cells)
      plan.push_back({{"method", c.method}, {"n", c.n}, {"c", c.width_c}, {"qbar", c.qbar}});
    json j;
    j["scenario"] = scenario;
    j["reps"] = reps;
    j["cells"] = plan;
    atomic_write_text(out_dir + "/plan.json", j.dump(2));
    std::cout << cells.size() << " cells planned\n";
    return 0;
  }

  IseContext ctx(scenario_by_name(scenario));

  struct Slot {
    IseRecord record;
    bool ok = false;
    bool failed = false;
  };
  std::vector<Slot> slots(cells.size() * static_cast<std::size_t>(reps));
  parallel_for(slots.size(), threads, [&](std::size_t task) {
    const std::size_t ci = task / static_cast<std::size_t>(reps);
    const int rep = static_cast<int>(task % static_cast<std::size_t>(reps));
    const BenchCell& cell = cells[ci];
    std::uint64_t rep_seed = derive_seed(derive_seed(seed, ci), static_cast<std::uint64_t>(rep));
    Slot& slot = slots[task];
    try {
      EstimatorParams p = params;
      p.width_c = cell.width_c;
      p.qbar = cell.qbar;
      auto t0 = std::chrono::steady_clock::now();
      Sample s{ctx.truth.sample(cell.n, rep_seed)};
      Fitted fit = fit_method(cell.method, ctx.truth, s, p, rep_seed);
      double ise = ctx.ise(fit, rep_seed);
      auto t1 = std::chrono::steady_clock::now();
      std::ostringstream label;
      label << cell.method;
      if (!sweep.empty()) label << ":c=" << cell.width_c;
      if (sweep == "c-qbar") label << ":q=" << cell.qbar;
      slot.record = {scenario, label.str(), cell.n, rep_seed, ise,
                     std::chrono::duration<double, std::milli>(t1 - t0).count()};
      slot.ok = true;
    } catch (const std::exception& e) {
      slot.failed = true;
      std::cerr << "cell " << cell.method << " n=" << cell.n << " rep=" << rep
                << " failed: " << e.what() << '\n';
    }
  });

  IseReport report;
  int failures = 0;
  for (const auto& slot : slots) {
    if (slot.ok)
      report.records.push_back(slot.record);
    else
      ++failures;
  }
  atomic_write_text(out_dir + "/records.csv", report.to_csv());

  json agg = json::array();
  for (const auto& a : report.aggregate())
    agg.push_back({{"scenario", a.scenario},
                   {"method", a.method},
                   {"n", a.n},
                   {"reps", a.reps},
                   {"mean_ise", a.mean},
                   {"median_ise", a.median},
                   {"var_ise", a.variance}});
  json j;
  j["scenario"] = scenario;
  j["reps"] = reps;
  j["failures"] = failures;
  j["aggregates"] = agg;
  atomic_write_text(out_dir + "/aggregate.json", j.dump(2));
  return failures == 0 ? 0 : 2;
}

int cmd_demo_pathology(const std::string& scenario, std::uint64_t seed, const std::string& out_dir,
                       int threads) {
  struct Setup {
    std::string name;
    std::string scenario;
    int n;
    int S;
  };
  std::vector<Setup> setups;
  if (scenario == "gamma" || scenario == "gamma-indep" || scenario == "ii" || scenario == "all")
    setups.push_back({"gamma_n250_S64", "gamma-indep", 250, 64});
  if (scenario == "ring" || scenario == "iii" || scenario == "all") {
    setups.push_back({"ring_n1000_S16", "ring", 1000, 16});
    setups.push_back({"ring_n1000_S25", "ring", 1000, 25});
  }
  if (setups.empty()) throw std::invalid_argument("demo-pathology: unknown scenario " + scenario);

  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  parallel_for(setups.size(), threads, [&](std::size_t i) {
    const Setup& setup = setups[i];
    TrueDensity truth = scenario_by_name(setup.scenario);
    Sample s{truth.sample(setup.n, derive_seed(seed, i))};

    EstimatorParams p;
    p.S = setup.S;
    p.qbar = 0.7;
    Fitted direct = fit_method("direct", truth, s, p, derive_seed(seed, i));
    Fitted spe = fit_method("spe-hist", truth, s, p, derive_seed(seed, i));

    Eigen::VectorXd lo, hi;
    scenario_box(truth.label, lo, hi);
    EvalGrid grid = EvalGrid::regular(lo, hi, 200);
    auto region = density_upper_level_cells(truth.density, grid, 0.5);

    json j;
    j["setup"] = setup.name;
    j["n"] = setup.n;
    j["S"] = setup.S;
    j["region_true_mass"] = region.true_mass;
    j["mass_direct"] = mass_in_cells(*direct.mixture, region);
    j["mass_spe"] = mass_in_cells(*spe.mixture, region);
    const std::string base = out_dir + "/" + setup.name;
    atomic_write_text(base + "_mass.json", j.dump(2));
    atomic_write_text(base + "_direct_mixture.json", mixture_to_json(*direct.mixture));
    atomic_write_text(base + "_spe_mixture.json", mixture_to_json(*spe.mixture));
    EvalGrid plot = EvalGrid::regular(lo, hi, 128);
    atomic_write_text(base + "_direct_grid.csv", grid_eval_csv(direct.eval, plot));
    atomic_write_text(base + "_spe_grid.csv", grid_eval_csv(spe.eval, plot));
  });
  return 0;
}

int cmd_classify(const std::string& data_path, const std::string& estimator, int reps,
                 std::uint64_t seed, const std::string& out_dir, int threads) {
  auto ds = load_wdbc(data_path);
  auto report = run_wdbc_experiment(ds, wdbc_estimator_by_name(estimator), reps, seed, threads);
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  atomic_write_text(out_dir + "/report.json", report.to_json());
  atomic_write_text(out_dir + "/rates.csv", report.rates_csv());
  std::cout << estimator << ": mean " << report.mean << ", sd " << report.sd << " over "
            << report.rates.size() << " reps (" << report.excluded << " excluded)\n";
  return report.excluded == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Smooth projection density estimation toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI config file; command line flags win");

  std::uint64_t seed = 0;
  int threads = default_thread_count();
  std::string out_dir = "out";

  // fit -----------------------------------------------------------------
  auto* fit = app.add_subcommand("fit", "fit one estimator to one sample");
  std::string fit_scenario = "gamma-indep", fit_input, fit_estimator = "spe-hist";
  int fit_n = 250, fit_grid_cells = 128;
  bool fit_trace = false;
  EstimatorParams fit_params;
  fit->add_option("--scenario", fit_scenario, "generator scenario (i|ii|iii|ggm5 or names)");
  fit->add_option("--input", fit_input, "headerless sample CSV (overrides --scenario)");
  fit->add_option("--n", fit_n, "sample size when generating");
  fit->add_option("--estimator", fit_estimator,
                  "hist|phist|ghist|kde-cv|em|direct|spe-hist|spe-phist|spe-ghist|spe-kde-cv");
  fit->add_option("--S", fit_params.S, "mixture components");
  fit->add_option("--qbar", fit_params.qbar, "fixed spherical scale");
  fit->add_option("--width-c", fit_params.width_c, "bin width constant c");
  fit->add_option("--penalty", fit_params.penalty, "log-concavity penalty weight");
  fit->add_option("--grid-cells", fit_grid_cells, "grid CSV resolution per dimension");
  fit->add_flag("--trace", fit_trace, "also write the projection trace CSV");
  fit->add_option("--seed", seed, "random seed")->required();
  fit->add_option("--out", out_dir, "output directory");

  // benchmark -----------------------------------------------------------
  auto* bench = app.add_subcommand("benchmark", "Monte-Carlo ISE comparison");
  std::string bench_scenario = "ring", bench_sweep;
  std::vector<int> bench_n = {100};
  std::vector<std::string> bench_methods = {"hist", "spe-hist", "em"};
  int bench_reps = 100;
  bool bench_paper_scale = false, bench_dry = false;
  EstimatorParams bench_params;
  bench->add_option("--scenario", bench_scenario, "scenario name");
  bench->add_option("--n-list", bench_n, "sample sizes")->delimiter(',');
  bench->add_option("--methods", bench_methods, "method list")->delimiter(',');
  bench->add_option("--reps", bench_reps, "replications per cell");
  bench->add_option("--sweep", bench_sweep, "c | c-qbar parameter sweeps");
  bench->add_option("--S", bench_params.S, "mixture components");
  bench->add_option("--qbar", bench_params.qbar, "fixed spherical scale");
  bench->add_option("--width-c", bench_params.width_c, "bin width constant c");
  bench->add_flag("--paper-scale", bench_paper_scale, "full published protocol sizes");
  bench->add_flag("--dry-run", bench_dry, "write the cell plan without running");
  bench->add_option("--threads", threads, "worker threads");
  bench->add_option("--seed", seed, "random seed")->required();
  bench->add_option("--out", out_dir, "output directory");

  // demo-pathology --------------------------------------------------------
  auto* demo = app.add_subcommand("demo-pathology", "direct projection vs SPE demonstrations");
  std::string demo_scenario = "all";
  demo->add_option("--scenario", demo_scenario, "gamma | ring | all");
  demo->add_option("--threads", threads, "worker threads");
  demo->add_option("--seed", seed, "random seed")->required();
  demo->add_option("--out", out_dir, "output directory");

  // classify ------------------------------------------------------------
  auto* cls = app.add_subcommand("classify", "WDBC out-of-sample experiment");
  std::string cls_data = "data/wdbc.data", cls_estimator = "spe";
  int cls_reps = 100;
  cls->add_option("--data", cls_data, "path to wdbc.data");
  cls->add_option("--estimator", cls_estimator, "spe | kde-cv | constant");
  cls->add_option("--reps", cls_reps, "replications");
  cls->add_option("--threads", threads, "worker threads");
  cls->add_option("--seed", seed, "random seed")->required();
  cls->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit->parsed())
      return cmd_fit(fit_scenario, fit_input, fit_n, fit_estimator, fit_params, seed, out_dir,
                     fit_grid_cells, fit_trace);
    if (bench->parsed())
      return cmd_benchmark(bench_scenario, bench_n, bench_methods, bench_reps, seed, out_dir,
                           bench_sweep, bench_params, bench_paper_scale, threads, bench_dry);
    if (demo->parsed()) return cmd_demo_pathology(demo_scenario, seed, out_dir, threads);
    if (cls->parsed()) return cmd_classify(cls_data, cls_estimator, cls_reps, seed, out_dir, threads);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
