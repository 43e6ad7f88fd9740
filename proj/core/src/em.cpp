#include "spe/em.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "spe/rng.hpp"

namespace spe {

EmResult em_spherical(const Sample& s, const EmConfig& cfg) {
  const int n = s.n();
  const int d = s.d();
  if (cfg.S < 1) throw std::invalid_argument("em_spherical: S must be >= 1");
  if (cfg.S > n) throw std::invalid_argument("em_spherical: S must not exceed n");
  if (!(cfg.qbar > 0.0)) throw std::invalid_argument("em_spherical: qbar must be > 0");

  Rng rng(cfg.seed);
  Eigen::MatrixXd means(cfg.S, d);
  {
    auto rows = rng.sample_without_replacement(n, cfg.S);
    for (int k = 0; k < cfg.S; ++k) means.row(k) = s.data.row(rows[static_cast<std::size_t>(k)]);
  }
  Eigen::VectorXd weights = Eigen::VectorXd::Constant(cfg.S, 1.0 / cfg.S);

  const double log_norm = -0.5 * d * std::log(2.0 * std::numbers::pi * cfg.qbar);
  const double inv2q = 1.0 / (2.0 * cfg.qbar);

  EmResult out{GaussianMixture(weights, means, cfg.qbar, default_box_halfwidth(s, cfg.qbar)), {},
               false, 0};

  Eigen::MatrixXd gamma(n, cfg.S);
  Eigen::MatrixXd logphi(n, cfg.S);
  for (int it = 0; it < cfg.max_iters; ++it) {
    // E-step with per-row log-sum-exp
    for (int k = 0; k < cfg.S; ++k)
      logphi.col(k) =
          -(s.data.rowwise() - means.row(k)).rowwise().squaredNorm() * inv2q;
    double loglik = 0.0;
    for (int i = 0; i < n; ++i) {
      double mx = -std::numeric_limits<double>::infinity();
      for (int k = 0; k < cfg.S; ++k) {
        double v = weights[k] > 0.0 ? std::log(weights[k]) + logphi(i, k)
                                    : -std::numeric_limits<double>::infinity();
        gamma(i, k) = v;
        mx = std::max(mx, v);
      }
      if (!std::isfinite(mx)) {
        // zero density under every component: spread responsibility evenly
        gamma.row(i).setConstant(1.0 / cfg.S);
        loglik += -std::numeric_limits<double>::infinity();
        continue;
      }
      double sum = 0.0;
      for (int k = 0; k < cfg.S; ++k) {
        gamma(i, k) = std::exp(gamma(i, k) - mx);
        sum += gamma(i, k);
      }
      gamma.row(i) /= sum;
      loglik += mx + std::log(sum) + log_norm;
    }
    out.loglik_trace.push_back(loglik);

    // M-step; sums run in fixed row order so runs are bit-reproducible
    for (int k = 0; k < cfg.S; ++k) {
      double nk = gamma.col(k).sum();
      if (nk <= 0.0) {
        int j = static_cast<int>(rng.uniform01() * n);
        if (j >= n) j = n - 1;
        means.row(k) = s.data.row(j);
        weights[k] = 1.0 / n;
        ++out.reinit_count;
        continue;
      }
      means.row(k) = (gamma.col(k).transpose() * s.data) / nk;
      weights[k] = nk / n;
    }
    weights /= weights.sum();  // exact simplex after any reinit adjustments

    if (out.loglik_trace.size() >= 2) {
      double prev = out.loglik_trace[out.loglik_trace.size() - 2];
      double cur = out.loglik_trace.back();
      if (std::isfinite(prev) && std::abs(cur - prev) < cfg.loglik_rel_tol * std::abs(prev)) {
        out.converged = true;
        break;
      }
    }
  }

  out.mixture = GaussianMixture(weights, means, cfg.qbar, default_box_halfwidth(s, cfg.qbar));
  return out;
}

}  // namespace spe
