#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "oracles.hpp"
#include "spe/datagen.hpp"

using namespace spe;

namespace {
Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}
}  // namespace

TEST_CASE("scenario (i): density value at mu1 by direct formula") {
  auto t = make_scenario_i();
  Eigen::VectorXd mu1 = vec2(1.0, 2.0), mu2 = vec2(-1.0, 1.0);
  Eigen::MatrixXd s1(2, 2), s2(2, 2);
  s1 << 2.0, -0.5, -0.5, 1.5;
  s2 << 4.0, 0.9, 0.9, 1.5;
  auto mvn = [](const Eigen::VectorXd& x, const Eigen::VectorXd& m, const Eigen::MatrixXd& cov) {
    Eigen::VectorXd c = x - m;
    return std::exp(-0.5 * c.dot(cov.inverse() * c)) /
           (2.0 * std::numbers::pi * std::sqrt(cov.determinant()));
  };
  double expected = 0.5 * mvn(mu1, mu1, s1) + 0.5 * mvn(mu1, mu2, s2);
  CHECK(t.density(mu1) == doctest::Approx(expected).epsilon(1e-12));
  // both covariances admit a Cholesky factor
  CHECK(Eigen::LLT<Eigen::MatrixXd>(s1).info() == Eigen::Success);
  CHECK(Eigen::LLT<Eigen::MatrixXd>(s2).info() == Eigen::Success);
}

TEST_CASE("scenario (i): sample covariance matches the mixture moments within 1%") {
  auto t = make_scenario_i();
  Eigen::MatrixXd draws = t.sample(1000000, 3);
  Eigen::RowVectorXd mean = draws.colwise().mean();
  Eigen::MatrixXd centered = draws.rowwise() - mean;
  Eigen::MatrixXd cov = centered.transpose() * centered / (draws.rows() - 1.0);

  Eigen::VectorXd mu1 = vec2(1.0, 2.0), mu2 = vec2(-1.0, 1.0);
  Eigen::MatrixXd s1(2, 2), s2(2, 2);
  s1 << 2.0, -0.5, -0.5, 1.5;
  s2 << 4.0, 0.9, 0.9, 1.5;
  Eigen::VectorXd m = 0.5 * (mu1 + mu2);
  Eigen::MatrixXd expected = 0.5 * (s1 + mu1 * mu1.transpose()) +
                             0.5 * (s2 + mu2 * mu2.transpose()) - m * m.transpose();
  double scale = expected.cwiseAbs().maxCoeff();
  CHECK((cov - expected).cwiseAbs().maxCoeff() / scale < 0.01);
}

TEST_CASE("scenario (ii): density formula and support") {
  auto t = make_scenario_ii();
  CHECK(t.density(vec2(1.0, 1.0)) == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
  CHECK(t.density(vec2(-0.5, 1.0)) == 0.0);
  CHECK(t.density(vec2(1.0, -0.5)) == 0.0);
}

TEST_CASE("scenario (ii): marginal means converge to 2 within 1%") {
  auto t = make_scenario_ii();
  Eigen::MatrixXd draws = t.sample(1000000, 5);
  for (int j = 0; j < 2; ++j) CHECK(std::abs(draws.col(j).mean() - 2.0) / 2.0 < 0.01);
  CHECK(draws.minCoeff() > 0.0);
}

TEST_CASE("scenario (iii): ring structure") {
  auto m = make_scenario_iii_mixture();
  CHECK(m.S() == 500);
  CHECK(m.qbar() == 0.7);
  for (int s = 0; s < m.S(); ++s)
    CHECK(m.means().row(s).norm() == doctest::Approx(4.0).epsilon(1e-12));

  // quarter-turn symmetry: the mean set maps onto itself
  auto t = make_scenario_iii();
  CHECK(std::abs(t.density(vec2(4.0, 0.0)) - t.density(vec2(0.0, 4.0))) < 1e-6);

  double integral = oracles::box_quadrature(t.density, vec2(-8.0, -8.0), vec2(8.0, 8.0), 400);
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("ggm5: precision matrix is SPD and empirically recovered") {
  Eigen::MatrixXd a = ggm5_precision();
  CHECK((a - a.transpose()).cwiseAbs().maxCoeff() == 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  CHECK(es.eigenvalues().minCoeff() > 0.0);

  auto t = make_ggm5();
  Eigen::MatrixXd draws = t.sample(1000000, 7);
  Eigen::RowVectorXd mean = draws.colwise().mean();
  Eigen::MatrixXd centered = draws.rowwise() - mean;
  Eigen::MatrixXd cov = centered.transpose() * centered / (draws.rows() - 1.0);
  Eigen::MatrixXd prec = cov.inverse();
  // entrywise within 2% of the largest entry scale
  CHECK((prec - a).cwiseAbs().maxCoeff() / a.cwiseAbs().maxCoeff() < 0.02);

  // Y1 is independent of the rest: near-zero empirical correlations
  for (int j = 1; j < 5; ++j) {
    double c = cov(0, j) / std::sqrt(cov(0, 0) * cov(j, j));
    CHECK(std::abs(c) < 0.01);
  }

  REQUIRE(t.factorization.has_value());
  CHECK_NOTHROW(t.factorization->validate(5));
}

TEST_CASE("density/sampler pairing: KS on scenario (ii) marginal") {
  auto t = make_scenario_ii();
  Eigen::MatrixXd draws = t.sample(100000, 9);
  std::vector<double> xs(draws.col(0).data(), draws.col(0).data() + draws.rows());
  auto cdf = [](double x) { return x <= 0.0 ? 0.0 : 1.0 - (1.0 + x) * std::exp(-x); };
  CHECK(oracles::ks_distance(xs, cdf) < 0.01);
}

TEST_CASE("identical seeds reproduce samples exactly; scenario lookup works") {
  auto t = make_scenario_iii();
  Eigen::MatrixXd a = t.sample(300, 11), b = t.sample(300, 11);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);

  CHECK(scenario_by_name("i").label == "normal-mix");
  CHECK(scenario_by_name("gamma-indep").label == "gamma-indep");
  CHECK(scenario_by_name("ring").label == "ring");
  CHECK(scenario_by_name("ggm5").label == "ggm5");
  CHECK_THROWS_AS(scenario_by_name("nope"), std::invalid_argument);
}
