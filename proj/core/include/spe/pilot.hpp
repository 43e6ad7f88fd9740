#pragma once

#include <functional>
#include <optional>
#include <string>

#include <Eigen/Core>

namespace spe {

enum class PilotKind { histogram, perturbed_histogram, graphical_histogram, kde, tabulated };

std::string pilot_kind_name(PilotKind k);

/// Uniform handle over a fitted pilot estimator: a pointwise density
/// evaluator plus, when the kind admits them in closed form, a CDF and
/// the self-energy integral of the squared density. Immutable; safe to
/// evaluate from many threads.
class PilotDensity {
 public:
  using Eval = std::function<double(const Eigen::VectorXd&)>;

  PilotDensity(PilotKind kind, int dim, Eval eval, Eval cdf = nullptr,
               std::optional<double> self_energy = std::nullopt)
      : kind_(kind), dim_(dim), eval_(std::move(eval)), cdf_(std::move(cdf)),
        self_energy_(self_energy) {}

  PilotKind kind() const { return kind_; }
  int dim() const { return dim_; }

  double operator()(const Eigen::VectorXd& x) const { return eval_(x); }

  bool has_cdf() const { return static_cast<bool>(cdf_); }
  double cdf(const Eigen::VectorXd& t) const;

  /// Exact integral of the squared density, when available for this kind.
  std::optional<double> self_energy() const { return self_energy_; }

 private:
  PilotKind kind_;
  int dim_;
  Eval eval_;
  Eval cdf_;
  std::optional<double> self_energy_;
};

/// Tabulated external pilot: CSV with header x1,...,xd,density over a
/// regular grid (strictly monotone coordinates validated on load);
/// evaluation is multilinear interpolation, 0 outside the grid hull.
PilotDensity load_tabulated_pilot_csv(const std::string& path);

}  // namespace spe
