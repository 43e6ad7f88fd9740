#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "oracles.hpp"
#include "spe/metrics.hpp"
#include "spe/mixture.hpp"
#include "spe/rng.hpp"

using namespace spe;

namespace {

GaussianMixture random_mixture(int S, int d, double qbar, double box, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXd w(S);
  for (int s = 0; s < S; ++s) w[s] = rng.uniform(0.1, 1.0);
  w /= w.sum();
  Eigen::MatrixXd mu(S, d);
  for (int s = 0; s < S; ++s)
    for (int j = 0; j < d; ++j) mu(s, j) = rng.uniform(-0.8 * box, 0.8 * box);
  return GaussianMixture(w, mu, qbar, box);
}

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("standard bivariate Gaussian at its mean is 1/(2 pi)") {
  GaussianMixture m(Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Zero(1, 2), 1.0, 1.0);
  CHECK(m(vec2(0, 0)) == doctest::Approx(1.0 / (2.0 * std::numbers::pi)).epsilon(1e-12));
}

TEST_CASE("duplicate components collapse to the single-component value") {
  Eigen::VectorXd w(2);
  w << 0.5, 0.5;
  Eigen::MatrixXd mu = Eigen::MatrixXd::Zero(2, 1);
  GaussianMixture two(w, mu, 1.0, 1.0);
  GaussianMixture one(Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Zero(1, 1), 1.0, 1.0);
  Eigen::VectorXd x(1);
  x << 0.0;
  CHECK(two(x) == doctest::Approx(one(x)).epsilon(1e-15));
}

TEST_CASE("random 3-component mixture integrates to 1 on a 200^2 grid") {
  auto m = random_mixture(3, 2, 0.5, 2.0, 11);
  const double pad = 2.0 + 6.0 * std::sqrt(0.5);
  double integral = oracles::box_quadrature([&](const Eigen::VectorXd& x) { return m(x); },
                                            vec2(-pad, -pad), vec2(pad, pad), 200);
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("evaluation is linear in the weights") {
  auto m = random_mixture(4, 2, 0.7, 3.0, 21);
  Rng rng(22);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::VectorXd x = vec2(rng.uniform(-4, 4), rng.uniform(-4, 4));
    double direct = m(x);
    double by_parts = m.weights().dot(m.component_values(x));
    CHECK(std::abs(direct - by_parts) <= 1e-14 * std::max(1.0, std::abs(direct)));
  }
}

TEST_CASE("sampling: LLN on a single Gaussian") {
  GaussianMixture m(Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Zero(1, 2), 1.0, 1.0);
  Sample s = m.sample(100000, 3);
  for (int j = 0; j < 2; ++j) CHECK(std::abs(s.data.col(j).mean()) < 0.02);
}

TEST_CASE("degenerate weights draw only from the live component") {
  Eigen::VectorXd w(2);
  w << 1.0, 0.0;
  Eigen::MatrixXd mu(2, 1);
  mu << 0.0, 50.0;
  GaussianMixture m(w, mu, 1.0, 60.0);
  Sample s = m.sample(5000, 17);
  CHECK(s.data.cwiseAbs().maxCoeff() < 10.0);  // all draws near component 1
}

TEST_CASE("1-d two-component sample matches the analytic CDF (KS < 0.01)") {
  Eigen::VectorXd w(2);
  w << 0.3, 0.7;
  Eigen::MatrixXd mu(2, 1);
  mu << -1.0, 2.0;
  const double qbar = 0.8;
  GaussianMixture m(w, mu, qbar, 5.0);
  Sample s = m.sample(100000, 29);
  std::vector<double> draws(s.data.data(), s.data.data() + s.n());
  auto cdf = [&](double x) {
    double acc = 0.0;
    for (int k = 0; k < 2; ++k)
      acc += w[k] * 0.5 * std::erfc(-(x - mu(k, 0)) / std::sqrt(2.0 * qbar));
    return acc;
  };
  CHECK(oracles::ks_distance(draws, cdf) < 0.01);
}

TEST_CASE("same seed is bit-identical, different seeds are not") {
  auto m = random_mixture(3, 2, 0.5, 2.0, 31);
  Sample a = m.sample(500, 7), b = m.sample(500, 7), c = m.sample(500, 8);
  CHECK((a.data - b.data).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.data - c.data).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("sample rejects count = 0") {
  auto m = random_mixture(2, 1, 1.0, 2.0, 41);
  CHECK_THROWS_AS(m.sample(0, 1), std::invalid_argument);
}

TEST_CASE("neg_log_hessian of a single standard Gaussian is the identity") {
  GaussianMixture m(Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Zero(1, 2), 1.0, 1.0);
  Rng rng(5);
  for (int rep = 0; rep < 5; ++rep) {
    Eigen::VectorXd x = vec2(rng.uniform(-3, 3), rng.uniform(-3, 3));
    Eigen::MatrixXd h = m.neg_log_hessian(x);
    CHECK((h - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
  }
  // general qbar scales as I/qbar
  GaussianMixture m2(Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Zero(1, 2), 0.25, 1.0);
  Eigen::MatrixXd h2 = m2.neg_log_hessian(vec2(0.7, -0.4));
  CHECK((h2 - 4.0 * Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("midpoint of far-separated components has a negative eigenvalue") {
  Eigen::VectorXd w(2);
  w << 0.5, 0.5;
  Eigen::MatrixXd mu(2, 2);
  mu << -4.0, 0.0, 4.0, 0.0;
  GaussianMixture m(w, mu, 1.0, 5.0);
  Eigen::VectorXd x = vec2(0.0, 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.neg_log_hessian(x));
  CHECK(es.eigenvalues().minCoeff() < 0.0);
  // cross-check the matrix against finite differences of -log f
  auto neglogf = [&](const Eigen::VectorXd& p) { return -std::log(m(p)); };
  Eigen::MatrixXd fd = oracles::fd_hessian(neglogf, x, 1e-4);
  CHECK((m.neg_log_hessian(x) - fd).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("neg_log_hessian matches finite differences at 100 random pairs") {
  Rng rng(77);
  for (int rep = 0; rep < 100; ++rep) {
    auto m = random_mixture(1 + static_cast<int>(rng.uniform01() * 4), 2,
                            rng.uniform(0.3, 1.5), 3.0, 1000 + static_cast<std::uint64_t>(rep));
    Eigen::VectorXd x = vec2(rng.uniform(-3, 3), rng.uniform(-3, 3));
    Eigen::MatrixXd h = m.neg_log_hessian(x);
    CHECK((h - h.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    auto neglogf = [&](const Eigen::VectorXd& p) { return -std::log(m(p)); };
    Eigen::MatrixXd fd = oracles::fd_hessian(neglogf, x, 1e-4);
    double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    CHECK((h - fd).cwiseAbs().maxCoeff() / scale < 1e-4);
  }
}

TEST_CASE("neg_log_hessian decomposes into score term plus curvature matrix") {
  auto m = random_mixture(3, 2, 0.6, 3.0, 91);
  Rng rng(92);
  for (int rep = 0; rep < 10; ++rep) {
    Eigen::VectorXd x = vec2(rng.uniform(-3, 3), rng.uniform(-3, 3));
    const double f = m(x);
    const double h = 1e-6;
    Eigen::VectorXd grad_f(2);
    for (int j = 0; j < 2; ++j) {
      Eigen::VectorXd xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      grad_f[j] = (m(xp) - m(xm)) / (2.0 * h);
    }
    Eigen::MatrixXd score = grad_f * grad_f.transpose() / (f * f);
    Eigen::MatrixXd sum = score + m.logconcavity_matrix(x);
    CHECK((sum - m.neg_log_hessian(x)).cwiseAbs().maxCoeff() < 1e-5);
  }
}

TEST_CASE("neg_log_hessian refuses points where the density underflows") {
  GaussianMixture m(Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Zero(1, 1), 0.01, 2000.0);
  Eigen::VectorXd far(1);
  far << 1000.0;
  CHECK(m(far) == 0.0);
  CHECK_THROWS_AS(m.neg_log_hessian(far), std::domain_error);
}

TEST_CASE("mixture JSON round-trips bit-exactly") {
  auto m = random_mixture(5, 3, 0.7311111111111111, 2.5, 55);
  GaussianMixture back = mixture_from_json(mixture_to_json(m));
  CHECK(back.S() == m.S());
  CHECK(back.qbar() == m.qbar());
  CHECK(back.box_M() == m.box_M());
  for (int s = 0; s < m.S(); ++s) {
    CHECK(back.weights()[s] == m.weights()[s]);
    for (int j = 0; j < m.dim(); ++j) CHECK(back.means()(s, j) == m.means()(s, j));
  }
}

TEST_CASE("constructor enforces the invariants") {
  Eigen::VectorXd w(2);
  Eigen::MatrixXd mu = Eigen::MatrixXd::Zero(2, 1);
  w << 0.6, 0.5;  // sums to 1.1
  CHECK_THROWS_AS(GaussianMixture(w, mu, 1.0, 1.0), std::invalid_argument);
  w << -0.1, 1.1;  // negative weight
  CHECK_THROWS_AS(GaussianMixture(w, mu, 1.0, 1.0), std::invalid_argument);
  w << 0.5, 0.5;
  CHECK_THROWS_AS(GaussianMixture(w, mu, 0.0, 1.0), std::invalid_argument);  // qbar
  Eigen::MatrixXd far(2, 1);
  far << 0.0, 5.0;
  CHECK_THROWS_AS(GaussianMixture(w, far, 1.0, 1.0), std::invalid_argument);  // outside box
}
