#pragma once

#include <string>

#include <Eigen/Core>

namespace spe {

/// An n x d data matrix; rows are observations, each carrying empirical
/// weight exactly 1/n. Immutable after construction.
struct Sample {
  Eigen::MatrixXd data;

  Sample() = default;
  explicit Sample(Eigen::MatrixXd m);  // validates n >= 1, d >= 1, finite entries

  int n() const { return static_cast<int>(data.rows()); }
  int d() const { return static_cast<int>(data.cols()); }
  Eigen::VectorXd row(int i) const { return data.row(i).transpose(); }
};

/// Headerless CSV, one observation per row.
Sample load_sample_csv(const std::string& path);
void save_sample_csv(const Sample& s, const std::string& path);

}  // namespace spe
