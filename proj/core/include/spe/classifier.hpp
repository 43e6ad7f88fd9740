#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace spe {

struct LabeledDataset {
  Eigen::MatrixXd features;  // n x d
  std::vector<int> labels;   // 1 = malignant, 0 = benign
  std::string provenance;

  int n() const { return static_cast<int>(features.rows()); }
  int d() const { return static_cast<int>(features.cols()); }
};

/// UCI wdbc.data reader (id, diagnosis M/B, 30 features). Keeps the four
/// mean-value features at 1-indexed positions 1, 2, 8, 10 of the first
/// ten: radius, texture, concave points, fractal dimension. Validates the
/// published shape (569 rows, 212 M / 357 B) and fails hard otherwise;
/// malformed lines are reported with their line number.
LabeledDataset load_wdbc(const std::string& path);

struct Posterior {
  double post1 = 0.0;
  double post0 = 0.0;
  bool tie = false;  // both class numerators were zero
};

/// Bayes posterior from class-conditional density values and prior p1.
/// Returns (1/2, 1/2) with the tie flag when both numerators vanish.
Posterior bayes_posterior(double f1_value, double f0_value, double p1);
Posterior bayes_posterior(const std::function<double(const Eigen::VectorXd&)>& f1,
                          const std::function<double(const Eigen::VectorXd&)>& f0, double p1,
                          const Eigen::VectorXd& y);

/// 1 iff post1 >= post0: ties go to the malignant class.
int classify(double post1, double post0);

enum class WdbcEstimator { spe, kde_cv, constant };
WdbcEstimator wdbc_estimator_by_name(const std::string& name);

struct ClassifierReport {
  std::string method;
  std::vector<double> rates;  // per-replication misclassification m/50
  int excluded = 0;           // replications dropped after estimator failure
  double mean = 0.0;
  double sd = 0.0;
  std::string to_json() const;
  std::string rates_csv() const;  // rep,rate
};

/// The out-of-sample protocol: per replication draw 50 test rows without
/// replacement, fit per-class densities on the remaining rows with the
/// chosen estimator, classify with training-proportion priors, and record
/// m/50. Features are standardized per replication by the pooled training
/// mean/sd (shared by both classes) before any fitting.
///
/// SPE setup: per-class histogram pilot with widths 2*IQR_j*n^{-1/8}, a
/// 3^4-component dictionary, qbar = 0.5 * median pairwise squared
/// distance / d on the standardized class sample (recorded in the report).
/// KDE setup: per-class LSCV bandwidth over the default grid.
ClassifierReport run_wdbc_experiment(const LabeledDataset& ds, WdbcEstimator estimator, int reps,
                                     std::uint64_t seed, int threads = 1);

}  // namespace spe
