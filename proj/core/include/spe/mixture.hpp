#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Core>

#include "spe/sample.hpp"

namespace spe {

/// Location mixture of spherical Gaussians: sum_s pi_s * N(mu_s, qbar*I_d),
/// with weights on the unit simplex and means confined to [-M, M]^d.
///
/// Immutable after construction; evaluation is pure and thread-safe.
/// Density values below 1e-300 are clamped to 0 so downstream optimizers
/// never see denormals.
class GaussianMixture {
 public:
  /// Validates: weights nonnegative and summing to 1 within 1e-12, means
  /// inside the box, qbar > 0, box_M > 0, finite entries. Throws
  /// std::invalid_argument on violation.
  GaussianMixture(Eigen::VectorXd weights, Eigen::MatrixXd means, double qbar, double box_M);

  int S() const { return static_cast<int>(weights_.size()); }
  int dim() const { return static_cast<int>(means_.cols()); }
  const Eigen::VectorXd& weights() const { return weights_; }
  const Eigen::MatrixXd& means() const { return means_; }  // S x d
  double qbar() const { return qbar_; }
  double box_M() const { return box_M_; }

  /// Density at x.
  double operator()(const Eigen::VectorXd& x) const;

  /// phi(x; mu_s, qbar I) for every component (no mixing weights).
  Eigen::VectorXd component_values(const Eigen::VectorXd& x) const;

  /// count iid draws; component index ~ weights, then a spherical normal.
  /// Reproducible for a fixed seed. Rejects count < 1.
  Sample sample(int count, std::uint64_t seed) const;

  /// -grad grad^T log f at x. Throws std::domain_error when f(x) has
  /// underflowed to 0 (no finite value exists there).
  Eigen::MatrixXd neg_log_hessian(const Eigen::VectorXd& x) const;

  /// The curvature part of -grad grad^T log f: the term left after removing
  /// the (always PSD) score outer-product,
  ///   (1/f) sum_s (pi_s/qbar) phi_s (I - w_s w_s^T),  w_s = (x-mu_s)/sqrt(qbar).
  /// PSD-ness of this matrix everywhere is sufficient for log-concavity.
  Eigen::MatrixXd logconcavity_matrix(const Eigen::VectorXd& x) const;

 private:
  Eigen::MatrixXd logconcavity_matrix_impl(const Eigen::VectorXd& x, const Eigen::VectorXd& phis,
                                           double f) const;

  Eigen::VectorXd weights_;
  Eigen::MatrixXd means_;
  double qbar_;
  double box_M_;
  double norm_const_;  // (2 pi qbar)^{-d/2}
};

/// Default box half-width: max absolute data coordinate plus 3*sqrt(qbar).
double default_box_halfwidth(const Sample& s, double qbar);

/// JSON object {S, qbar, M, weights:[...], means:[[...]]}; doubles use
/// shortest round-trip formatting, so finite values survive bit-exactly.
std::string mixture_to_json(const GaussianMixture& m);
GaussianMixture mixture_from_json(const std::string& text);

}  // namespace spe
