#include "spe/classifier.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "spe/bandwidth.hpp"
#include "spe/histogram.hpp"
#include "spe/io.hpp"
#include "spe/kde.hpp"
#include "spe/mixture.hpp"
#include "spe/parallel.hpp"
#include "spe/projection.hpp"
#include "spe/rng.hpp"
#include "spe/sample.hpp"

namespace spe {

namespace {
// 0-indexed positions of the four kept features among the 30
// (mean radius, mean texture, mean concave points, mean fractal dimension)
constexpr int kKeptFeatures[4] = {0, 1, 7, 9};
constexpr int kExpectedRows = 569;
constexpr int kExpectedMalignant = 212;
constexpr int kExpectedBenign = 357;
constexpr int kTestSize = 50;
}  // namespace

LabeledDataset load_wdbc(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open WDBC file: " + path);

  std::vector<std::array<double, 4>> rows;
  std::vector<int> labels;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 32)
      throw std::runtime_error(path + ": line " + std::to_string(lineno) +
                               ": expected 32 fields (id, diagnosis, 30 features), got " +
                               std::to_string(fields.size()));
    const std::string& diag = fields[1];
    if (diag != "M" && diag != "B")
      throw std::runtime_error(path + ": line " + std::to_string(lineno) +
                               ": diagnosis must be M or B");
    std::array<double, 4> feat{};
    try {
      for (int k = 0; k < 4; ++k)
        feat[static_cast<std::size_t>(k)] = std::stod(fields[static_cast<std::size_t>(2 + kKeptFeatures[k])]);
    } catch (const std::exception&) {
      throw std::runtime_error(path + ": line " + std::to_string(lineno) + ": parse error");
    }
    rows.push_back(feat);
    labels.push_back(diag == "M" ? 1 : 0);
  }

  const int n_m = static_cast<int>(std::count(labels.begin(), labels.end(), 1));
  const int n_b = static_cast<int>(labels.size()) - n_m;
  if (static_cast<int>(rows.size()) != kExpectedRows || n_m != kExpectedMalignant ||
      n_b != kExpectedBenign)
    throw std::runtime_error(path + ": expected 569 rows with 212 M / 357 B, found " +
                             std::to_string(rows.size()) + " rows with " + std::to_string(n_m) +
                             " M / " + std::to_string(n_b) + " B");

  LabeledDataset ds;
  ds.features.resize(static_cast<Eigen::Index>(rows.size()), 4);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int k = 0; k < 4; ++k) ds.features(static_cast<Eigen::Index>(i), k) = rows[i][static_cast<std::size_t>(k)];
  ds.labels = std::move(labels);
  ds.provenance = path;
  return ds;
}

Posterior bayes_posterior(double f1_value, double f0_value, double p1) {
  if (!(p1 >= 0.0 && p1 <= 1.0)) throw std::invalid_argument("bayes_posterior: p1 outside [0,1]");
  const double a = f1_value * p1;
  const double b = f0_value * (1.0 - p1);
  if (a + b <= 0.0) return Posterior{0.5, 0.5, true};
  const double post1 = a / (a + b);
  return Posterior{post1, 1.0 - post1, false};
}

Posterior bayes_posterior(const std::function<double(const Eigen::VectorXd&)>& f1,
                          const std::function<double(const Eigen::VectorXd&)>& f0, double p1,
                          const Eigen::VectorXd& y) {
  return bayes_posterior(f1(y), f0(y), p1);
}

int classify(double post1, double post0) { return post1 >= post0 ? 1 : 0; }

WdbcEstimator wdbc_estimator_by_name(const std::string& name) {
  if (name == "spe") return WdbcEstimator::spe;
  if (name == "kde-cv" || name == "kde_cv") return WdbcEstimator::kde_cv;
  if (name == "constant") return WdbcEstimator::constant;
  throw std::invalid_argument("unknown WDBC estimator: " + name +
                              " (expected spe, kde-cv, or constant)");
}

namespace {

std::function<double(const Eigen::VectorXd&)> fit_class_density(const Sample& train,
                                                                WdbcEstimator estimator) {
  switch (estimator) {
    case WdbcEstimator::constant:
      return [](const Eigen::VectorXd&) { return 1.0; };
    case WdbcEstimator::kde_cv: {
      double h = lscv_bandwidth(train, default_lscv_grid(train));
      auto data = std::make_shared<Sample>(train);
      return [data, h](const Eigen::VectorXd& y) { return kde_evaluate(*data, h, y); };
    }
    case WdbcEstimator::spe: {
      const int n = train.n();
      const int d = train.d();
      // histogram pilot, widths 2 * IQR_j * n^{-1/(2d)} = 2 IQR_j n^{-1/8}
      BandwidthRule rule{BandwidthKind::iqr_2d, 2.0, 0};
      Eigen::VectorXd widths = iqr_binwidths(train, rule);
      auto pilot = histogram_pilot(histogram_fit(train, widths, Eigen::VectorXd::Zero(d)));

      // qbar: half the median pairwise squared distance per dimension
      std::vector<double> sq;
      sq.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
      for (int i = 0; i < n; ++i)
        for (int k = i + 1; k < n; ++k)
          sq.push_back((train.data.row(i) - train.data.row(k)).squaredNorm());
      std::nth_element(sq.begin(), sq.begin() + static_cast<std::ptrdiff_t>(sq.size() / 2), sq.end());
      const double qbar = 0.5 * sq[sq.size() / 2] / d;

      ProjectionConfig cfg;
      cfg.S = 81;  // 3^4 dictionary
      cfg.qbar = qbar;
      cfg.box_M = default_box_halfwidth(train, qbar);
      auto result = project(pilot, train, cfg);
      auto mix = std::make_shared<GaussianMixture>(std::move(result.mixture));
      return [mix](const Eigen::VectorXd& y) { return (*mix)(y); };
    }
  }
  throw std::logic_error("fit_class_density: unreachable");
}

}  // namespace

ClassifierReport run_wdbc_experiment(const LabeledDataset& ds, WdbcEstimator estimator, int reps,
                                     std::uint64_t seed, int threads) {
  if (reps < 1) throw std::invalid_argument("run_wdbc_experiment: reps must be >= 1");
  if (ds.d() != 4) throw std::invalid_argument("run_wdbc_experiment: expected d = 4 features");
  const int n = ds.n();
  if (n <= kTestSize) throw std::invalid_argument("run_wdbc_experiment: dataset too small");

  std::vector<double> rates(static_cast<std::size_t>(reps),
                            std::numeric_limits<double>::quiet_NaN());

  parallel_for(static_cast<std::size_t>(reps), threads, [&](std::size_t rep) {
    Rng rng(derive_seed(seed, rep));
    std::vector<int> test_idx = rng.sample_without_replacement(n, kTestSize);
    std::vector<char> is_test(static_cast<std::size_t>(n), 0);
    for (int i : test_idx) is_test[static_cast<std::size_t>(i)] = 1;

    // split and standardize by the pooled training moments
    std::vector<int> train_idx;
    train_idx.reserve(static_cast<std::size_t>(n - kTestSize));
    for (int i = 0; i < n; ++i)
      if (!is_test[static_cast<std::size_t>(i)]) train_idx.push_back(i);

    Eigen::MatrixXd train_all(train_idx.size(), 4);
    for (std::size_t r = 0; r < train_idx.size(); ++r)
      train_all.row(static_cast<Eigen::Index>(r)) = ds.features.row(train_idx[r]);
    Eigen::RowVectorXd mu = train_all.colwise().mean();
    Eigen::RowVectorXd sd =
        ((train_all.rowwise() - mu).array().square().colwise().sum() /
         (static_cast<double>(train_all.rows()) - 1.0)).sqrt();
    for (int j = 0; j < 4; ++j)
      if (!(sd[j] > 0.0)) throw std::runtime_error("degenerate training feature");

    int n1 = 0;
    for (int i : train_idx) n1 += ds.labels[static_cast<std::size_t>(i)];
    const int n0 = static_cast<int>(train_idx.size()) - n1;
    if (n1 == 0 || n0 == 0) throw std::runtime_error("single-class training split");

    Eigen::MatrixXd c1(n1, 4), c0(n0, 4);
    int r1 = 0, r0 = 0;
    for (int i : train_idx) {
      Eigen::RowVectorXd z = (ds.features.row(i) - mu).cwiseQuotient(sd);
      if (ds.labels[static_cast<std::size_t>(i)])
        c1.row(r1++) = z;
      else
        c0.row(r0++) = z;
    }

    try {
      auto f1 = fit_class_density(Sample(std::move(c1)), estimator);
      auto f0 = fit_class_density(Sample(std::move(c0)), estimator);
      const double p1 = static_cast<double>(n1) / static_cast<double>(train_idx.size());

      int miss = 0;
      for (int i : test_idx) {
        Eigen::VectorXd z =
            ((ds.features.row(i) - mu).cwiseQuotient(sd)).transpose();
        Posterior post = bayes_posterior(f1(z), f0(z), p1);
        if (classify(post.post1, post.post0) != ds.labels[static_cast<std::size_t>(i)]) ++miss;
      }
      rates[rep] = static_cast<double>(miss) / kTestSize;
    } catch (const std::exception&) {
      // leave NaN: this replication is excluded and counted
    }
  });

  ClassifierReport report;
  switch (estimator) {
    case WdbcEstimator::spe: report.method = "spe"; break;
    case WdbcEstimator::kde_cv: report.method = "kde-cv"; break;
    case WdbcEstimator::constant: report.method = "constant"; break;
  }
  for (double r : rates) {
    if (std::isnan(r))
      ++report.excluded;
    else
      report.rates.push_back(r);
  }
  if (report.rates.empty()) throw std::runtime_error("run_wdbc_experiment: every replication failed");
  double sum = 0.0;
  for (double r : report.rates) sum += r;
  report.mean = sum / static_cast<double>(report.rates.size());
  double ss = 0.0;
  for (double r : report.rates) ss += (r - report.mean) * (r - report.mean);
  report.sd = report.rates.size() > 1
                  ? std::sqrt(ss / (static_cast<double>(report.rates.size()) - 1.0))
                  : 0.0;
  return report;
}

std::string ClassifierReport::to_json() const {
  nlohmann::json j;
  j["method"] = method;
  j["reps"] = rates.size();
  j["excluded"] = excluded;
  j["mean"] = mean;
  j["sd"] = sd;
  j["rates"] = rates;
  return j.dump(2);
}

std::string ClassifierReport::rates_csv() const {
  std::ostringstream out;
  out << "rep,rate\n";
  for (std::size_t i = 0; i < rates.size(); ++i) out << i << ',' << format_double(rates[i]) << '\n';
  return out.str();
}

}  // namespace spe
