#include "spe/projection.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "spe/io.hpp"

namespace spe {

namespace {

constexpr double kUnderflowFloor = 1e-300;
constexpr double kArmijoC = 1e-4;

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

Eigen::MatrixXd clamp_to_box(Eigen::MatrixXd m, double box_M) {
  return m.cwiseMax(-box_M).cwiseMin(box_M);
}

// Shared state for one alternation problem.
struct Problem {
  const Eigen::VectorXd& target;
  const Sample& s;
  const ProjectionConfig& cfg;
};

struct CritEval {
  double value = 0.0;
  Eigen::MatrixXd grad;  // S x d, filled only when requested
};

// criterion (1/n)||target - f(Y)||^2 and, optionally, its mean-gradient
//   dC/dmu_s = -(2/n) sum_i r_i pi_s phi_is (Y_i - mu_s)/qbar.
CritEval eval_criterion(const Problem& p, const Eigen::VectorXd& weights,
                        const Eigen::MatrixXd& means, bool want_grad,
                        int* frozen_out = nullptr) {
  const int n = p.s.n();
  const int d = p.s.d();
  const int S = static_cast<int>(weights.size());
  const double qbar = p.cfg.qbar;
  const double norm_const = std::pow(2.0 * std::numbers::pi * qbar, -0.5 * d);

  Eigen::MatrixXd phi(n, S);
  for (int s2 = 0; s2 < S; ++s2) {
    Eigen::VectorXd sq =
        (p.s.data.rowwise() - means.row(s2)).rowwise().squaredNorm();
    phi.col(s2) = (sq * (-0.5 / qbar)).array().exp() * norm_const;
  }
  Eigen::VectorXd f = phi * weights;
  Eigen::VectorXd r = p.target - f;

  CritEval out;
  out.value = r.squaredNorm() / n;
  if (!want_grad) return out;

  out.grad.setZero(S, d);
  int frozen = 0;
  for (int s2 = 0; s2 < S; ++s2) {
    if (phi.col(s2).maxCoeff() <= kUnderflowFloor) {
      ++frozen;  // density underflow at every datum: freeze this component
      continue;
    }
    Eigen::VectorXd c = r.cwiseProduct(phi.col(s2)) * (weights[s2] / qbar);
    Eigen::RowVectorXd g =
        (-2.0 / n) * (c.transpose() * p.s.data - c.sum() * means.row(s2));
    if (!g.allFinite()) {
      ++frozen;
      continue;
    }
    out.grad.row(s2) = g;
  }
  if (frozen_out) *frozen_out = frozen;
  return out;
}

// --- log-concavity margin over a grid -------------------------------------

struct MarginInfo {
  double margin = std::numeric_limits<double>::infinity();
  int skipped = 0;
  bool found = false;
  // grid rows whose smallest eigenvalue is negative (or, when none are,
  // the single active row), largest violation first
  std::vector<std::size_t> violating_rows;
};

struct PointCurvature {
  double lambda_min;
  Eigen::VectorXd eigvec;
  double f;
  Eigen::VectorXd phis;
};

PointCurvature curvature_at(const Eigen::VectorXd& weights, const Eigen::MatrixXd& means,
                            double qbar, const Eigen::VectorXd& x) {
  const int d = static_cast<int>(means.cols());
  const int S = static_cast<int>(weights.size());
  const double norm_const = std::pow(2.0 * std::numbers::pi * qbar, -0.5 * d);
  const double sq = std::sqrt(qbar);
  PointCurvature out;
  out.phis.resize(S);
  for (int s2 = 0; s2 < S; ++s2)
    out.phis[s2] =
        norm_const * std::exp(-(x - means.row(s2).transpose()).squaredNorm() / (2.0 * qbar));
  out.f = weights.dot(out.phis);
  if (out.f < kUnderflowFloor) {
    out.lambda_min = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  Eigen::VectorXd u = Eigen::VectorXd::Zero(d);  // grad f
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(d, d);
  for (int s2 = 0; s2 < S; ++s2) {
    Eigen::VectorXd w = (x - means.row(s2).transpose()) / sq;
    const double a = weights[s2] * out.phis[s2] / qbar;
    u -= a * sq * w;
    D += a * (Eigen::MatrixXd::Identity(d, d) - w * w.transpose());
  }
  Eigen::MatrixXd H = (u * u.transpose()) / (out.f * out.f) + D / out.f;
  if (d == 1) {
    out.lambda_min = H(0, 0);
    out.eigvec = Eigen::VectorXd::Ones(1);
  } else if (d == 2) {
    // closed-form symmetric 2x2 eigenpair; the margin sweep is hot
    const double a = H(0, 0), b = H(0, 1), c = H(1, 1);
    const double half_diff = 0.5 * (a - c);
    const double root = std::sqrt(half_diff * half_diff + b * b);
    out.lambda_min = 0.5 * (a + c) - root;
    Eigen::Vector2d v(b, out.lambda_min - a);
    if (v.squaredNorm() < 1e-60) v = (a <= c) ? Eigen::Vector2d(1, 0) : Eigen::Vector2d(0, 1);
    out.eigvec = v.normalized();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    Eigen::Index which;
    out.lambda_min = es.eigenvalues().minCoeff(&which);
    out.eigvec = es.eigenvectors().col(which);
  }
  return out;
}

MarginInfo margin_over_grid(const Eigen::VectorXd& weights, const Eigen::MatrixXd& means,
                            double qbar, const EvalGrid& grid) {
  MarginInfo info;
  std::size_t argmin = 0;
  std::vector<std::pair<double, std::size_t>> negative;
  for (std::size_t r = 0; r < grid.size(); ++r) {
    Eigen::VectorXd x = grid.points.row(static_cast<Eigen::Index>(r)).transpose();
    PointCurvature pc = curvature_at(weights, means, qbar, x);
    if (std::isnan(pc.lambda_min)) {
      ++info.skipped;
      continue;
    }
    if (pc.lambda_min < info.margin) {
      info.margin = pc.lambda_min;
      argmin = r;
      info.found = true;
    }
    if (pc.lambda_min < 0.0) negative.emplace_back(pc.lambda_min, r);
  }
  if (!info.found)
    throw std::runtime_error("logconcavity margin: density underflowed at every grid point");
  std::sort(negative.begin(), negative.end());
  for (const auto& [lam, r] : negative) info.violating_rows.push_back(r);
  if (info.violating_rows.empty()) info.violating_rows.push_back(argmin);
  return info;
}

// d(lambda_min(x))/d(mu) at one grid point, treating the eigenvector as
// fixed (exact for a simple eigenvalue).
Eigen::MatrixXd lambda_mean_gradient(const Eigen::VectorXd& weights, const Eigen::MatrixXd& means,
                                     double qbar, const Eigen::VectorXd& x,
                                     const PointCurvature& pc) {
  const int d = static_cast<int>(means.cols());
  const int S = static_cast<int>(weights.size());
  const double sqq = std::sqrt(qbar);
  const Eigen::VectorXd& v = pc.eigvec;

  Eigen::VectorXd a(S), beta(S);
  std::vector<Eigen::VectorXd> w(static_cast<std::size_t>(S));
  for (int s2 = 0; s2 < S; ++s2) {
    w[static_cast<std::size_t>(s2)] = (x - means.row(s2).transpose()) / sqq;
    a[s2] = weights[s2] * pc.phis[s2] / qbar;
    beta[s2] = v.dot(w[static_cast<std::size_t>(s2)]);
  }
  const double f = pc.f;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(d);
  double dv = 0.0;  // v^T D v
  for (int s2 = 0; s2 < S; ++s2) {
    u -= a[s2] * sqq * w[static_cast<std::size_t>(s2)];
    dv += a[s2] * (1.0 - beta[s2] * beta[s2]);
  }
  const double alpha = v.dot(u);

  Eigen::MatrixXd grad(S, d);
  for (int s2 = 0; s2 < S; ++s2) {
    const double as = a[s2];
    const double bs = beta[s2];
    for (int k = 0; k < d; ++k) {
      const double wk = w[static_cast<std::size_t>(s2)][k];
      const double vk = v[k];
      const double df = as * sqq * wk;  // df/dmu_{s,k}
      // d(v^T u)/dmu_{s,k} from du/dmu = a_s (e_k - w_{s,k} w_s)
      const double d_alpha = as * (vk - wk * bs);
      const double t1 = -2.0 * df * alpha * alpha / (f * f * f) +
                        2.0 * alpha * d_alpha / (f * f);
      const double d_dv = (as * wk / sqq) * (1.0 - bs * bs) + (as / sqq) * 2.0 * vk * bs;
      const double t2 = -df * dv / (f * f) + d_dv / f;
      grad(s2, k) = t1 + t2;
    }
  }
  return grad;
}

// Gradient of the per-point violation surrogate
//   sum over violating rows of weight * max(0, -lambda_min(x))^2.
// At a single violating point this is the exact penalty gradient; with
// several it aggregates them, which stops the descent from bouncing
// between competing violation sites. Acceptance tests always run on the
// spec objective, so the trace stays monotone either way.
Eigen::MatrixXd margin_mean_gradient(const Eigen::VectorXd& weights, const Eigen::MatrixXd& means,
                                     double qbar, const EvalGrid& grid, double penalty_weight,
                                     const MarginInfo& info) {
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(means.rows(), means.cols());
  for (std::size_t r : info.violating_rows) {
    Eigen::VectorXd x = grid.points.row(static_cast<Eigen::Index>(r)).transpose();
    PointCurvature pc = curvature_at(weights, means, qbar, x);
    if (std::isnan(pc.lambda_min) || pc.lambda_min >= 0.0) continue;
    grad += (-2.0 * penalty_weight * (-pc.lambda_min)) *
            lambda_mean_gradient(weights, means, qbar, x, pc);
  }
  return grad;
}

// --- penalty machinery -----------------------------------------------------

struct PenaltyContext {
  EvalGrid grid;
  double weight = 0.0;
  bool active() const { return weight > 0.0; }
};

double penalty_value(const PenaltyContext& pen, const Eigen::VectorXd& weights,
                     const Eigen::MatrixXd& means, double qbar, MarginInfo* info_out = nullptr) {
  if (!pen.active()) return 0.0;
  MarginInfo info = margin_over_grid(weights, means, qbar, pen.grid);
  if (info_out) *info_out = info;
  const double viol = std::max(0.0, -info.margin);
  return pen.weight * viol * viol;
}

Eigen::MatrixXd penalty_mean_gradient(const PenaltyContext& pen, const Eigen::VectorXd& weights,
                                      const Eigen::MatrixXd& means, double qbar,
                                      const MarginInfo& info) {
  if (info.margin >= 0.0) return Eigen::MatrixXd::Zero(means.rows(), means.cols());
  return margin_mean_gradient(weights, means, qbar, pen.grid, pen.weight, info);
}

// Projected gradient with Armijo backtracking on criterion (+ penalty).
// The min-over-grid penalty is nonsmooth with many near-tied violation
// sites whose single-site gradients seesaw; a family of deterministic
// contraction moves of the whole mean set toward its weighted center is
// offered alongside the gradient step, since log-concavity of a mixture
// is a statement about how tightly the means cluster.
MeanSolution descend_means(const Problem& p, const PenaltyContext& pen,
                           const Eigen::VectorXd& weights, Eigen::MatrixXd means) {
  const double box_M = p.cfg.box_M;
  MeanSolution out;
  out.frozen = 0;

  double step = 1.0;
  double value;
  {
    CritEval ce = eval_criterion(p, weights, means, false);
    value = ce.value + penalty_value(pen, weights, means, p.cfg.qbar);
  }
  for (int it = 0; it < p.cfg.mean_max_iters; ++it) {
    int frozen = 0;
    CritEval ce = eval_criterion(p, weights, means, true, &frozen);
    out.frozen = std::max(out.frozen, frozen);
    Eigen::MatrixXd grad = ce.grad;
    double current_penalty = 0.0;
    if (pen.active()) {
      MarginInfo info;
      current_penalty = penalty_value(pen, weights, means, p.cfg.qbar, &info);
      grad += penalty_mean_gradient(pen, weights, means, p.cfg.qbar, info);
    }

    if (pen.active() && current_penalty > 0.0) {
      Eigen::RowVectorXd center = weights.transpose() * means;
      bool moved = false;
      for (double c : {0.98, 0.9, 0.75, 0.5}) {
        Eigen::MatrixXd cand = ((means.rowwise() - center) * c).rowwise() + center;
        cand = clamp_to_box(cand, box_M);
        CritEval cv = eval_criterion(p, weights, cand, false);
        double cand_value = cv.value + penalty_value(pen, weights, cand, p.cfg.qbar);
        if (cand_value < value - 1e-14 * std::max(1.0, std::abs(value))) {
          means = cand;
          value = cand_value;
          out.iterations = it + 1;
          moved = true;
          break;
        }
      }
      if (moved) continue;
    }
    if (grad.cwiseAbs().maxCoeff() == 0.0) break;

    bool accepted = false;
    bool sufficient = false;
    Eigen::MatrixXd cand;
    double cand_value = value;
    for (int bt = 0; bt < 60; ++bt) {
      cand = clamp_to_box(means - step * grad, box_M);
      const double directional = (grad.array() * (cand - means).array()).sum();
      if (directional >= 0.0) {  // no feasible descent at this scale
        step *= 0.5;
        continue;
      }
      CritEval cv = eval_criterion(p, weights, cand, false);
      cand_value = cv.value + penalty_value(pen, weights, cand, p.cfg.qbar);
      if (cand_value <= value + kArmijoC * directional) {
        accepted = true;
        sufficient = true;
        break;
      }
      // under the aggregated penalty direction the Armijo model can
      // overpredict; keep any strict decrease rather than stalling
      if (cand_value < value - 1e-14 * std::max(1.0, std::abs(value))) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const double decrease = value - cand_value;
    const double moved = (cand - means).cwiseAbs().maxCoeff();
    means = cand;
    value = cand_value;
    out.iterations = it + 1;
    if (sufficient) step = std::min(step * 2.0, 1e9);
    if (decrease <= 1e-12 * std::max(value, 1e-300)) break;
    if (moved <= 1e-12 * (1.0 + means.cwiseAbs().maxCoeff())) break;
  }
  out.means = means;
  return out;
}

ProjectionResult alternate(const Eigen::VectorXd& target, const Sample& s,
                           const ProjectionConfig& cfg) {
  if (cfg.S < 1) throw std::invalid_argument("projection: S must be >= 1");
  if (cfg.S > s.n() + 1)
    throw std::invalid_argument("projection: S must not exceed n + 1 (here n = " +
                                std::to_string(s.n()) + ")");
  if (!(cfg.rel_tol > 0.0)) throw std::invalid_argument("projection: rel_tol must be > 0");
  if (!(cfg.qbar > 0.0)) throw std::invalid_argument("projection: qbar must be > 0");
  if (!(cfg.box_M > 0.0)) throw std::invalid_argument("projection: box_M must be > 0");
  if (target.size() != s.n()) throw std::invalid_argument("projection: target length != n");
  if (!target.allFinite() || target.minCoeff() < 0.0)
    throw std::invalid_argument("projection: target values must be finite and nonnegative");
  if (cfg.penalty_weight > 0.0 && s.d() > 2)
    throw std::invalid_argument(
        "projection: the log-concavity penalty is only supported for d <= 2");

  Problem p{target, s, cfg};
  PenaltyContext pen;
  pen.weight = cfg.penalty_weight;
  if (pen.active()) {
    Eigen::VectorXd lo = Eigen::VectorXd::Constant(s.d(), -cfg.box_M);
    Eigen::VectorXd hi = Eigen::VectorXd::Constant(s.d(), cfg.box_M);
    pen.grid = EvalGrid::regular(lo, hi, cfg.penalty_grid_cells);
  }

  Eigen::MatrixXd means;
  if (cfg.means_init) {
    means = *cfg.means_init;
    if (means.rows() != cfg.S || means.cols() != s.d())
      throw std::invalid_argument("projection: means_init must be S x d");
    if (means.cwiseAbs().maxCoeff() > cfg.box_M)
      throw std::invalid_argument("projection: means_init outside [-M, M]^d");
  } else {
    means = initial_means_grid(cfg.S, s.d(), cfg.box_M);
  }
  Eigen::VectorXd weights = Eigen::VectorXd::Constant(cfg.S, 1.0 / cfg.S);

  ProjectionTrace trace;
  double crit = eval_criterion(p, weights, means, false).value;
  double penv = penalty_value(pen, weights, means, cfg.qbar);
  trace.criterion.push_back(crit);
  trace.penalty.push_back(penv);
  trace.wall_ms.push_back(0.0);

  Eigen::MatrixXd phi = design_matrix(s, means, cfg.qbar);
  for (int outer = 0; outer < cfg.max_outer_iters; ++outer) {
    const double t0 = now_ms();
    const double prev_obj = trace.criterion.back() + trace.penalty.back();

    // weight subproblem: exact simplex QP; under a penalty, fall back along
    // the segment to the previous weights until the full objective decreases
    WeightSolution ws = solve_weights(target, phi, weights, cfg.weight_max_iters);
    trace.weight_solver_hit_cap = trace.weight_solver_hit_cap || !ws.converged;
    if (pen.active()) {
      double t = 1.0;
      bool ok = false;
      for (int bt = 0; bt < 40; ++bt) {
        Eigen::VectorXd cand = weights + t * (ws.weights - weights);
        double obj = (target - phi * cand).squaredNorm() / s.n() +
                     penalty_value(pen, cand, means, cfg.qbar);
        if (obj <= prev_obj) {
          weights = cand;
          ok = true;
          break;
        }
        t *= 0.5;
      }
      if (!ok) { /* keep previous weights */ }
    } else {
      weights = ws.weights;
    }

    // mean subproblem
    MeanSolution ms = descend_means(p, pen, weights, means);
    means = ms.means;
    trace.frozen_components = std::max(trace.frozen_components, ms.frozen);

    phi = design_matrix(s, means, cfg.qbar);
    crit = (target - phi * weights).squaredNorm() / s.n();
    penv = penalty_value(pen, weights, means, cfg.qbar);
    trace.criterion.push_back(crit);
    trace.penalty.push_back(penv);
    trace.wall_ms.push_back(now_ms() - t0);

    const double new_obj = crit + penv;
    if (prev_obj <= kUnderflowFloor || (prev_obj - new_obj) < cfg.rel_tol * prev_obj) {
      trace.converged = true;
      break;
    }
  }
  trace.iterations = static_cast<int>(trace.criterion.size()) - 1;

  return ProjectionResult{GaussianMixture(weights, means, cfg.qbar, cfg.box_M),
                          std::move(trace)};
}

}  // namespace

std::string ProjectionTrace::to_csv() const {
  std::ostringstream out;
  out << "iteration,criterion,penalty,wall_ms\n";
  for (std::size_t i = 0; i < criterion.size(); ++i)
    out << i << ',' << format_double(criterion[i]) << ',' << format_double(penalty[i]) << ','
        << format_double(wall_ms[i]) << '\n';
  return out.str();
}

Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v) {
  const int n = static_cast<int>(v.size());
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0, tau = 0.0;
  int rho = 0;
  double acc = 0.0;
  for (int j = 0; j < n; ++j) {
    acc += u[static_cast<std::size_t>(j)];
    const double t = (acc - 1.0) / (j + 1);
    if (u[static_cast<std::size_t>(j)] - t > 0.0) {
      rho = j + 1;
      css = acc;
      tau = t;
    }
  }
  (void)rho;
  (void)css;
  return (v.array() - tau).max(0.0);
}

Eigen::MatrixXd design_matrix(const Sample& s, const Eigen::MatrixXd& means, double qbar) {
  if (!(qbar > 0.0)) throw std::invalid_argument("design_matrix: qbar must be > 0");
  if (means.cols() != s.d()) throw std::invalid_argument("design_matrix: dimension mismatch");
  const int S = static_cast<int>(means.rows());
  const double norm_const = std::pow(2.0 * std::numbers::pi * qbar, -0.5 * s.d());
  Eigen::MatrixXd phi(s.n(), S);
  for (int c = 0; c < S; ++c) {
    Eigen::VectorXd sq = (s.data.rowwise() - means.row(c)).rowwise().squaredNorm();
    phi.col(c) = (sq * (-0.5 / qbar)).array().exp() * norm_const;
  }
  return phi;
}

double weight_kkt_residual(const Eigen::VectorXd& target, const Eigen::MatrixXd& Phi,
                           const Eigen::VectorXd& weights, double active_tol) {
  Eigen::VectorXd grad = 2.0 * (Phi.transpose() * (Phi * weights - target));
  const double nu = weights.dot(grad);  // multiplier estimate; exact at a KKT point
  double res = 0.0;
  for (int s2 = 0; s2 < weights.size(); ++s2) {
    if (weights[s2] > active_tol)
      res = std::max(res, std::abs(grad[s2] - nu));
    else
      res = std::max(res, std::max(0.0, nu - grad[s2]));
  }
  return res;
}

WeightSolution solve_weights(const Eigen::VectorXd& target, const Eigen::MatrixXd& Phi,
                             const std::optional<Eigen::VectorXd>& init, int max_iters) {
  if (!Phi.allFinite()) throw std::invalid_argument("solve_weights: design matrix must be finite");
  const int S = static_cast<int>(Phi.cols());
  WeightSolution out;
  out.weights = init ? project_to_simplex(*init) : Eigen::VectorXd::Constant(S, 1.0 / S);

  const Eigen::MatrixXd G = Phi.transpose() * Phi;
  const Eigen::VectorXd b = Phi.transpose() * target;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
  const double L = es.eigenvalues().maxCoeff();
  if (!(L > 0.0)) {  // all-zero design: every simplex point is optimal
    out.converged = true;
    return out;
  }
  const double kkt_tol = 1e-10 * std::max(1.0, b.cwiseAbs().maxCoeff());

  Eigen::VectorXd pi = out.weights;
  for (int it = 1; it <= max_iters; ++it) {
    Eigen::VectorXd pi_new = project_to_simplex(pi - (G * pi - b) / L);
    const double move = (pi_new - pi).lpNorm<Eigen::Infinity>();
    pi = pi_new;
    out.iterations = it;
    if (move < 1e-16 || (it % 32 == 0 && weight_kkt_residual(target, Phi, pi) < kkt_tol)) {
      out.converged = true;
      break;
    }
  }
  if (!out.converged && weight_kkt_residual(target, Phi, pi) < kkt_tol) out.converged = true;
  out.weights = pi;
  return out;
}

MeanSolution solve_means(const Eigen::VectorXd& target, const Sample& s,
                         const Eigen::VectorXd& weights, const Eigen::MatrixXd& means_init,
                         const ProjectionConfig& cfg) {
  if (std::abs(weights.sum() - 1.0) > 1e-9 || weights.minCoeff() < 0.0)
    throw std::invalid_argument("solve_means: weights must lie on the simplex");
  Problem p{target, s, cfg};
  PenaltyContext pen;  // criterion only
  return descend_means(p, pen, weights, clamp_to_box(means_init, cfg.box_M));
}

ProjectionResult project_to_values(const Eigen::VectorXd& pilot_values, const Sample& s,
                                   const ProjectionConfig& cfg) {
  return alternate(pilot_values, s, cfg);
}

ProjectionResult project(const PilotDensity& pilot, const Sample& s, const ProjectionConfig& cfg) {
  Eigen::VectorXd target(s.n());
  for (int i = 0; i < s.n(); ++i) target[i] = pilot(s.row(i));
  return alternate(target, s, cfg);
}

ProjectionResult direct_project(const Sample& s, const ProjectionConfig& cfg) {
  return alternate(Eigen::VectorXd::Constant(s.n(), 1.0 / s.n()), s, cfg);
}

double logconcavity_margin(const GaussianMixture& m, const EvalGrid& grid, int* skipped) {
  MarginInfo info = margin_over_grid(m.weights(), m.means(), m.qbar(), grid);
  if (skipped) *skipped = info.skipped;
  return info.margin;
}

ProjectionResult penalized_project(const PilotDensity& pilot, const Sample& s,
                                   const ProjectionConfig& cfg) {
  if (!(cfg.penalty_weight > 0.0))
    throw std::invalid_argument("penalized_project: penalty_weight must be > 0");
  return project(pilot, s, cfg);
}

namespace detail {
std::pair<double, Eigen::MatrixXd> margin_and_mean_gradient(const Eigen::VectorXd& weights,
                                                            const Eigen::MatrixXd& means,
                                                            double qbar, const EvalGrid& grid) {
  MarginInfo info = margin_over_grid(weights, means, qbar, grid);
  Eigen::VectorXd x =
      grid.points.row(static_cast<Eigen::Index>(info.violating_rows.front())).transpose();
  PointCurvature pc = curvature_at(weights, means, qbar, x);
  return {info.margin, lambda_mean_gradient(weights, means, qbar, x, pc)};
}
}  // namespace detail

Eigen::MatrixXd initial_means_grid(int S, int d, double box_M) {
  if (S < 1 || d < 1 || !(box_M > 0.0))
    throw std::invalid_argument("initial_means_grid: bad arguments");
  int k = static_cast<int>(std::llround(std::pow(static_cast<double>(S), 1.0 / d)));
  auto ipow = [](int base, int exp) {
    long long r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
  };
  if (k < 1 || ipow(k, d) != S) {
    k = static_cast<int>(std::ceil(std::pow(static_cast<double>(S), 1.0 / d) - 1e-12));
    while (ipow(k, d) < S) ++k;
  }
  const long long total = ipow(k, d);

  Eigen::VectorXd coords(k);
  if (k == 1)
    coords[0] = 0.0;
  else
    for (int i = 0; i < k; ++i) coords[i] = -box_M + 2.0 * box_M * i / (k - 1);

  Eigen::MatrixXd pts(total, d);
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  for (long long r = 0; r < total; ++r) {
    for (int j = 0; j < d; ++j) pts(r, j) = coords[idx[static_cast<std::size_t>(j)]];
    for (int j = d - 1; j >= 0; --j) {
      if (++idx[static_cast<std::size_t>(j)] < k) break;
      idx[static_cast<std::size_t>(j)] = 0;
    }
  }
  if (total == S) return pts;

  // keep the S points nearest the box center, stable in enumeration order
  std::vector<long long> order(static_cast<std::size_t>(total));
  std::iota(order.begin(), order.end(), 0LL);
  std::stable_sort(order.begin(), order.end(), [&](long long a, long long b) {
    return pts.row(a).squaredNorm() < pts.row(b).squaredNorm();
  });
  Eigen::MatrixXd out(S, d);
  for (int i = 0; i < S; ++i) out.row(i) = pts.row(order[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace spe
