#include "ctrldiffuse/data.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace ctrldiffuse {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

Eigen::LLT<Eigen::MatrixXd> checked_llt(const Eigen::MatrixXd& cov, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error(std::string(what) + ": covariance not positive definite");
  return llt;
}

double gaussian_log_pdf(const Eigen::VectorXd& x, const GaussianMarginal& g) {
  auto llt = checked_llt(g.cov, "gaussian_log_pdf");
  Eigen::VectorXd diff = x - g.mean;
  Eigen::VectorXd half = llt.matrixL().solve(diff);
  double log_det = 0.0;
  for (int i = 0; i < g.cov.rows(); ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i));
  return -0.5 * (x.size() * kLog2Pi + log_det + half.squaredNorm());
}

}  // namespace

double Marginal::log_density(const Eigen::VectorXd& x) const {
  if (components.size() == 1) return gaussian_log_pdf(x, components[0]);
  // log-sum-exp over components
  std::vector<double> logs(components.size());
  double max_log = -std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < components.size(); ++k) {
    logs[k] = std::log(weights[k]) + gaussian_log_pdf(x, components[k]);
    max_log = std::max(max_log, logs[k]);
  }
  double acc = 0.0;
  for (double l : logs) acc += std::exp(l - max_log);
  return max_log + std::log(acc);
}

Eigen::VectorXd Marginal::score(const Eigen::VectorXd& x) const {
  if (components.size() == 1) {
    auto llt = checked_llt(components[0].cov, "Marginal::score");
    return -llt.solve(x - components[0].mean);
  }
  std::vector<double> logs(components.size());
  double max_log = -std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < components.size(); ++k) {
    logs[k] = std::log(weights[k]) + gaussian_log_pdf(x, components[k]);
    max_log = std::max(max_log, logs[k]);
  }
  double norm = 0.0;
  for (double l : logs) norm += std::exp(l - max_log);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(x.size());
  for (size_t k = 0; k < components.size(); ++k) {
    double resp = std::exp(logs[k] - max_log) / norm;
    auto llt = checked_llt(components[k].cov, "Marginal::score");
    out.noalias() += resp * (-llt.solve(x - components[k].mean));
  }
  return out;
}

Eigen::VectorXd Marginal::overall_mean() const {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(dim());
  for (size_t k = 0; k < components.size(); ++k) m += weights[k] * components[k].mean;
  return m;
}

Eigen::MatrixXd Marginal::overall_cov() const {
  Eigen::VectorXd m = overall_mean();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(dim(), dim());
  for (size_t k = 0; k < components.size(); ++k) {
    Eigen::VectorXd d = components[k].mean - m;
    c += weights[k] * (components[k].cov + d * d.transpose());
  }
  return c;
}

DataDistribution DataDistribution::gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov) {
  if (cov.rows() != mean.size() || cov.cols() != mean.size())
    throw std::invalid_argument("DataDistribution: covariance shape mismatch");
  if (!cov.isApprox(cov.transpose(), 1e-12))
    throw std::invalid_argument("DataDistribution: covariance not symmetric");
  DataDistribution d;
  d.weights = {1.0};
  d.means = {std::move(mean)};
  d.covs = {std::move(cov)};
  return d;
}

DataDistribution DataDistribution::mixture(std::vector<double> weights,
                                           std::vector<Eigen::VectorXd> means,
                                           std::vector<Eigen::MatrixXd> covs) {
  if (weights.empty() || weights.size() != means.size() || weights.size() != covs.size())
    throw std::invalid_argument("DataDistribution: mixture arity mismatch");
  double sum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("DataDistribution: negative mixture weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("DataDistribution: mixture weights must sum to 1");
  for (size_t k = 0; k < means.size(); ++k) {
    if (means[k].size() != means[0].size())
      throw std::invalid_argument("DataDistribution: component dims differ");
    if (!covs[k].isApprox(covs[k].transpose(), 1e-12))
      throw std::invalid_argument("DataDistribution: covariance not symmetric");
  }
  DataDistribution d;
  d.weights = std::move(weights);
  d.means = std::move(means);
  d.covs = std::move(covs);
  return d;
}

Eigen::VectorXd DataDistribution::sample(RngStream& rng) const {
  size_t k = 0;
  if (is_mixture()) {
    double u = rng.uniform01();
    double acc = 0.0;
    for (; k + 1 < weights.size(); ++k) {
      acc += weights[k];
      if (u <= acc) break;
    }
  }
  // Cholesky of PSD covariance; the degenerate zero-covariance case (point
  // mass, tests only) falls back to the zero factor.
  Eigen::LLT<Eigen::MatrixXd> llt(covs[k]);
  Eigen::MatrixXd L;
  if (llt.info() == Eigen::Success) {
    L = llt.matrixL();
  } else if (covs[k].isZero(0.0)) {
    L = Eigen::MatrixXd::Zero(dim(), dim());
  } else {
    throw std::runtime_error("DataDistribution::sample: covariance not PSD");
  }
  Eigen::VectorXd z(dim());
  for (int i = 0; i < dim(); ++i) z[i] = rng.normal();
  return means[k] + L * z;
}

Marginal forward_marginal(const DataDistribution& data, const NoiseSchedule& sched,
                          double t) {
  double ab = sched.alpha_bar(t);
  double at = std::sqrt(ab);
  Marginal m;
  m.weights = data.weights;
  m.components.reserve(data.weights.size());
  Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(data.dim(), data.dim());
  for (size_t k = 0; k < data.weights.size(); ++k) {
    GaussianMarginal g;
    g.mean = at * data.means[k];
    g.cov = ab * data.covs[k] + (1.0 - ab) * eye;
    g.t = t;
    m.components.push_back(std::move(g));
  }
  return m;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> sample_forward(const DataDistribution& data,
                                                           const NoiseSchedule& sched,
                                                           double t, RngStream& rng) {
  double at = sched.alpha_t(t);
  double st = sched.sigma_t(t);
  Eigen::VectorXd x0 = data.sample(rng);
  Eigen::VectorXd xt(x0.size());
  for (int i = 0; i < x0.size(); ++i) xt[i] = at * x0[i] + st * rng.normal();
  return {std::move(x0), std::move(xt)};
}

Eigen::VectorXd true_score(const DataDistribution& data, const NoiseSchedule& sched,
                           double t, const Eigen::VectorXd& x) {
  return forward_marginal(data, sched, t).score(x);
}

}  // namespace ctrldiffuse
