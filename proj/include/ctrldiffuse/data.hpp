#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>

#include "ctrldiffuse/rng.hpp"
#include "ctrldiffuse/schedule.hpp"

namespace ctrldiffuse {

/// One Gaussian component of a (possibly mixed) marginal law.
struct GaussianMarginal {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  double t = 0.0;
};

/// Weighted Gaussian components; a plain Gaussian is the single-component case.
/// Carries the closed-form density/score machinery that the oracles lean on.
struct Marginal {
  std::vector<double> weights;
  std::vector<GaussianMarginal> components;

  int dim() const { return static_cast<int>(components.at(0).mean.size()); }

  double log_density(const Eigen::VectorXd& x) const;
  /// Stein score: gradient of log_density. Throws on singular covariance.
  Eigen::VectorXd score(const Eigen::VectorXd& x) const;

  Eigen::VectorXd overall_mean() const;
  Eigen::MatrixXd overall_cov() const;
};

/// Data distribution with analytic forward marginals: a Gaussian or a finite
/// Gaussian mixture. Covariances are kept SPD except for the degenerate
/// point-mass case used by tests (zero covariance samples fine; score and
/// density throw on the singular solves).
struct DataDistribution {
  std::vector<double> weights;           // size 1 for plain Gaussians
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> covs;

  static DataDistribution gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov);
  static DataDistribution mixture(std::vector<double> weights,
                                  std::vector<Eigen::VectorXd> means,
                                  std::vector<Eigen::MatrixXd> covs);

  int dim() const { return static_cast<int>(means.at(0).size()); }
  bool is_mixture() const { return weights.size() > 1; }

  Eigen::VectorXd sample(RngStream& rng) const;
};

/// Law of X_t under the VP forward SDE: componentwise mean alpha_t * m0 and
/// covariance alpha_bar * S0 + (1 - alpha_bar) * I, weights unchanged.
Marginal forward_marginal(const DataDistribution& data, const NoiseSchedule& sched,
                          double t);

/// Draws x0 ~ p_data and x_t = alpha_t x0 + sigma_t eps with eps ~ N(0, I).
/// The eps used is recoverable as (x_t - alpha_t x0) / sigma_t for t > 0.
std::pair<Eigen::VectorXd, Eigen::VectorXd> sample_forward(const DataDistribution& data,
                                                           const NoiseSchedule& sched,
                                                           double t, RngStream& rng);

/// grad_x log p(t, x) in closed form.
Eigen::VectorXd true_score(const DataDistribution& data, const NoiseSchedule& sched,
                           double t, const Eigen::VectorXd& x);

}  // namespace ctrldiffuse
