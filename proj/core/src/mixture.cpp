#include "spe/mixture.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "spe/rng.hpp"

namespace spe {

namespace {
constexpr double kUnderflowFloor = 1e-300;
}

GaussianMixture::GaussianMixture(Eigen::VectorXd weights, Eigen::MatrixXd means, double qbar,
                                 double box_M)
    : weights_(std::move(weights)), means_(std::move(means)), qbar_(qbar), box_M_(box_M) {
  if (weights_.size() < 1) throw std::invalid_argument("GaussianMixture: need S >= 1");
  if (means_.rows() != weights_.size())
    throw std::invalid_argument("GaussianMixture: weights/means size mismatch");
  if (means_.cols() < 1) throw std::invalid_argument("GaussianMixture: need d >= 1");
  if (!(qbar_ > 0.0)) throw std::invalid_argument("GaussianMixture: qbar must be > 0");
  if (!(box_M_ > 0.0)) throw std::invalid_argument("GaussianMixture: box_M must be > 0");
  if (!weights_.allFinite() || !means_.allFinite())
    throw std::invalid_argument("GaussianMixture: parameters must be finite");
  if (weights_.minCoeff() < 0.0)
    throw std::invalid_argument("GaussianMixture: weights must be nonnegative");
  if (std::abs(weights_.sum() - 1.0) > 1e-12)
    throw std::invalid_argument("GaussianMixture: weights must sum to 1 within 1e-12");
  // tiny slack absorbs round-off from box projections
  if (means_.cwiseAbs().maxCoeff() > box_M_ * (1.0 + 1e-12) + 1e-12)
    throw std::invalid_argument("GaussianMixture: means must lie in [-M, M]^d");
  norm_const_ = std::pow(2.0 * std::numbers::pi * qbar_, -0.5 * static_cast<double>(dim()));
}

Eigen::VectorXd GaussianMixture::component_values(const Eigen::VectorXd& x) const {
  const int s = S();
  Eigen::VectorXd out(s);
  const double inv2q = 1.0 / (2.0 * qbar_);
  for (int i = 0; i < s; ++i) {
    double sq = (x - means_.row(i).transpose()).squaredNorm();
    out[i] = norm_const_ * std::exp(-sq * inv2q);
  }
  return out;
}

double GaussianMixture::operator()(const Eigen::VectorXd& x) const {
  if (x.size() != dim()) throw std::invalid_argument("GaussianMixture: dimension mismatch");
  double v = weights_.dot(component_values(x));
  return v < kUnderflowFloor ? 0.0 : v;
}

Sample GaussianMixture::sample(int count, std::uint64_t seed) const {
  if (count < 1) throw std::invalid_argument("GaussianMixture::sample: count must be >= 1");
  Rng rng(seed);
  const double sd = std::sqrt(qbar_);
  Eigen::MatrixXd out(count, dim());
  for (int i = 0; i < count; ++i) {
    int s = rng.categorical(weights_);
    for (int j = 0; j < dim(); ++j) out(i, j) = means_(s, j) + sd * rng.normal();
  }
  return Sample(std::move(out));
}

Eigen::MatrixXd GaussianMixture::neg_log_hessian(const Eigen::VectorXd& x) const {
  const int d = dim();
  const double f = (*this)(x);
  if (!(f > 0.0))
    throw std::domain_error("neg_log_hessian: density underflowed to 0 at this point");

  const Eigen::VectorXd phis = component_values(x);
  // grad f = -sum_s pi_s phi_s (x - mu_s)/qbar
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(d);
  for (int s = 0; s < S(); ++s)
    grad -= (weights_[s] * phis[s] / qbar_) * (x - means_.row(s).transpose());

  Eigen::MatrixXd h = (grad * grad.transpose()) / (f * f);
  h += logconcavity_matrix_impl(x, phis, f);
  return h;
}

Eigen::MatrixXd GaussianMixture::logconcavity_matrix(const Eigen::VectorXd& x) const {
  const double f = (*this)(x);
  if (!(f > 0.0))
    throw std::domain_error("logconcavity_matrix: density underflowed to 0 at this point");
  return logconcavity_matrix_impl(x, component_values(x), f);
}

Eigen::MatrixXd GaussianMixture::logconcavity_matrix_impl(const Eigen::VectorXd& x,
                                                          const Eigen::VectorXd& phis,
                                                          double f) const {
  const int d = dim();
  const double sq = std::sqrt(qbar_);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
  for (int s = 0; s < S(); ++s) {
    Eigen::VectorXd w = (x - means_.row(s).transpose()) / sq;
    double a = weights_[s] * phis[s] / qbar_;
    acc += a * (Eigen::MatrixXd::Identity(d, d) - w * w.transpose());
  }
  return acc / f;
}

double default_box_halfwidth(const Sample& s, double qbar) {
  return s.data.cwiseAbs().maxCoeff() + 3.0 * std::sqrt(qbar);
}

std::string mixture_to_json(const GaussianMixture& m) {
  nlohmann::json j;
  j["S"] = m.S();
  j["qbar"] = m.qbar();
  j["M"] = m.box_M();
  j["weights"] = std::vector<double>(m.weights().data(), m.weights().data() + m.S());
  std::vector<std::vector<double>> means(m.S());
  for (int s = 0; s < m.S(); ++s) {
    means[s].resize(m.dim());
    for (int k = 0; k < m.dim(); ++k) means[s][k] = m.means()(s, k);
  }
  j["means"] = means;
  return j.dump(2);
}

GaussianMixture mixture_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  const int s = j.at("S").get<int>();
  auto w = j.at("weights").get<std::vector<double>>();
  auto mu = j.at("means").get<std::vector<std::vector<double>>>();
  if (static_cast<int>(w.size()) != s || static_cast<int>(mu.size()) != s)
    throw std::invalid_argument("mixture_from_json: S does not match array sizes");
  const int d = mu.empty() ? 0 : static_cast<int>(mu.front().size());
  Eigen::VectorXd weights = Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  Eigen::MatrixXd means(s, d);
  for (int i = 0; i < s; ++i) {
    if (static_cast<int>(mu[i].size()) != d)
      throw std::invalid_argument("mixture_from_json: ragged means");
    for (int k = 0; k < d; ++k) means(i, k) = mu[i][k];
  }
  return GaussianMixture(std::move(weights), std::move(means), j.at("qbar").get<double>(),
                         j.at("M").get<double>());
}

}  // namespace spe
