#include "spe/datagen.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "spe/metrics.hpp"
#include "spe/rng.hpp"

namespace spe {

namespace {

// general-covariance Gaussian with precomputed Cholesky pieces
struct MvNormal {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  Eigen::MatrixXd chol;      // lower, cov = L L^T
  Eigen::MatrixXd cov_inv;
  double log_norm = 0.0;

  explicit MvNormal(Eigen::VectorXd mu, Eigen::MatrixXd sigma)
      : mean(std::move(mu)), cov(std::move(sigma)) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("MvNormal: covariance is not positive definite");
    chol = llt.matrixL();
    cov_inv = llt.solve(Eigen::MatrixXd::Identity(cov.rows(), cov.cols()));
    double log_det = 0.0;
    for (int i = 0; i < chol.rows(); ++i) log_det += 2.0 * std::log(chol(i, i));
    log_norm = -0.5 * (cov.rows() * std::log(2.0 * std::numbers::pi) + log_det);
  }

  double density(const Eigen::VectorXd& x) const {
    Eigen::VectorXd c = x - mean;
    return std::exp(log_norm - 0.5 * c.dot(cov_inv * c));
  }

  Eigen::VectorXd draw(Rng& rng) const {
    Eigen::VectorXd z(mean.size());
    for (int j = 0; j < mean.size(); ++j) z[j] = rng.normal();
    return mean + chol * z;
  }
};

// int N(mu_a, Sa) N(mu_b, Sb) dx = N(mu_a - mu_b; 0, Sa + Sb)
double gaussian_overlap(const Eigen::VectorXd& da, const Eigen::MatrixXd& sum_cov) {
  MvNormal conv(Eigen::VectorXd::Zero(da.size()), sum_cov);
  return conv.density(da);
}

}  // namespace

TrueDensity make_scenario_i() {
  Eigen::VectorXd mu1(2), mu2(2);
  mu1 << 1.0, 2.0;
  mu2 << -1.0, 1.0;
  Eigen::MatrixXd s1(2, 2), s2(2, 2);
  s1 << 2.0, -0.5, -0.5, 1.5;
  s2 << 4.0, 0.9, 0.9, 1.5;
  auto a = std::make_shared<MvNormal>(mu1, s1);
  auto b = std::make_shared<MvNormal>(mu2, s2);

  TrueDensity t;
  t.label = "normal-mix";
  t.dim = 2;
  t.density = [a, b](const Eigen::VectorXd& x) {
    return 0.5 * a->density(x) + 0.5 * b->density(x);
  };
  t.sample = [a, b](int count, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd out(count, 2);
    for (int i = 0; i < count; ++i)
      out.row(i) = (rng.uniform01() < 0.5 ? *a : *b).draw(rng).transpose();
    return out;
  };
  t.self_energy = 0.25 * gaussian_overlap(Eigen::VectorXd::Zero(2), 2.0 * s1) +
                  0.25 * gaussian_overlap(Eigen::VectorXd::Zero(2), 2.0 * s2) +
                  0.5 * gaussian_overlap(mu1 - mu2, s1 + s2);
  return t;
}

TrueDensity make_scenario_ii() {
  TrueDensity t;
  t.label = "gamma-indep";
  t.dim = 2;
  t.density = [](const Eigen::VectorXd& x) {
    if (x[0] <= 0.0 || x[1] <= 0.0) return 0.0;
    return x[0] * std::exp(-x[0]) * x[1] * std::exp(-x[1]);
  };
  t.sample = [](int count, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd out(count, 2);
    for (int i = 0; i < count; ++i)
      for (int j = 0; j < 2; ++j) out(i, j) = rng.gamma(2.0);
    return out;
  };
  // int (y e^-y)^2 dy = Gamma(3)/8 = 1/4, per coordinate
  t.self_energy = 1.0 / 16.0;
  return t;
}

GaussianMixture make_scenario_iii_mixture() {
  const int S = 500;
  Eigen::VectorXd w = Eigen::VectorXd::Constant(S, 1.0 / S);
  Eigen::MatrixXd means(S, 2);
  for (int j = 0; j < S; ++j) {
    // endpoint-exclusive spacing keeps the mean set exactly invariant
    // under quarter-turn rotations and avoids the duplicate at t = 2 pi
    double tj = 2.0 * std::numbers::pi * j / S;
    means(j, 0) = 4.0 * std::cos(tj);
    means(j, 1) = 4.0 * std::sin(tj);
  }
  return GaussianMixture(std::move(w), std::move(means), 0.7, 4.0);
}

TrueDensity make_scenario_iii() {
  auto m = std::make_shared<GaussianMixture>(make_scenario_iii_mixture());
  TrueDensity t;
  t.label = "ring";
  t.dim = 2;
  t.density = [m](const Eigen::VectorXd& x) { return (*m)(x); };
  t.sample = [m](int count, std::uint64_t seed) { return m->sample(count, seed).data; };
  t.self_energy = mixture_self_energy(*m);
  return t;
}

Eigen::MatrixXd ggm5_precision() {
  Eigen::MatrixXd a(5, 5);
  a << 3, 0, 0, 0, 0,
       0, 5, 0, 1, -1,
       0, 0, 2, 0, 0,
       0, 1, 0, 2, 0,
       0, -1, 0, 0, 2;
  return a;
}

TrueDensity make_ggm5() {
  Eigen::MatrixXd a = ggm5_precision();
  Eigen::MatrixXd cov = a.inverse();
  auto mv = std::make_shared<MvNormal>(Eigen::VectorXd::Zero(5), cov);

  TrueDensity t;
  t.label = "ggm5";
  t.dim = 5;
  t.density = [mv](const Eigen::VectorXd& x) { return mv->density(x); };
  t.sample = [mv](int count, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd out(count, 5);
    for (int i = 0; i < count; ++i) out.row(i) = mv->draw(rng).transpose();
    return out;
  };
  t.self_energy = gaussian_overlap(Eigen::VectorXd::Zero(5), 2.0 * cov);

  GraphicalFactorization f;
  f.factors = {{4, {1}}, {3, {1}}, {1, {}}, {0, {}}, {2, {}}};  // (Y5|Y2)(Y4|Y2)(Y2)(Y1)(Y3)
  t.factorization = f;
  return t;
}

TrueDensity scenario_by_name(const std::string& name) {
  if (name == "normal-mix" || name == "i") return make_scenario_i();
  if (name == "gamma-indep" || name == "gamma" || name == "ii") return make_scenario_ii();
  if (name == "ring" || name == "iii") return make_scenario_iii();
  if (name == "ggm5") return make_ggm5();
  throw std::invalid_argument("unknown scenario: " + name);
}

}  // namespace spe
