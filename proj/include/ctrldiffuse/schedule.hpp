#pragma once

#include <vector>

#include <Eigen/Core>

namespace ctrldiffuse {

/// Variance-preserving noise schedule. beta(t) is either constant or linear in
/// t; both admit closed-form alpha_bar, which every downstream oracle relies
/// on. Immutable after construction, safe for concurrent reads.
struct NoiseSchedule {
  enum class Kind { Constant, Linear };

  Kind kind = Kind::Linear;
  double beta_min = 0.1;
  double beta_max = 20.0;
  double horizon_T = 1.0;

  static NoiseSchedule constant(double beta, double T);
  static NoiseSchedule linear(double beta_min, double beta_max, double T);

  /// beta(t). Throws std::domain_error outside [0,T].
  double beta_at(double t) const;

  /// VP-SDE coefficients: drift f(t,x) = -0.5*beta(t)*x, diffusion g(t) = sqrt(beta(t)).
  void sde_coeffs(double t, const Eigen::VectorXd& x, Eigen::VectorXd& drift_out,
                  double& diffusion_out) const;

  double g(double t) const;          // sqrt(beta(t))
  double g_squared(double t) const;  // beta(t)

  /// alpha_bar(t) = exp(-int_0^t beta), closed form per kind.
  double alpha_bar(double t) const;

  double alpha_t(double t) const;  // sqrt(alpha_bar)
  double sigma_t(double t) const;  // sqrt(1 - alpha_bar)

  /// log-SNR log(alpha_t^2 / sigma_t^2). Throws std::domain_error at t = 0
  /// where sigma vanishes.
  double snr_lambda(double t) const;

 private:
  void check_time(double t) const;
};

/// Uniform discretization of [0, T] into N steps (N+1 nodes).
struct TimeGrid {
  int num_steps = 1;
  double horizon_T = 1.0;

  TimeGrid() = default;
  TimeGrid(int N, double T);

  double dt() const { return horizon_T / num_steps; }
  double node(int i) const { return horizon_T * i / num_steps; }
  std::vector<double> nodes() const;

  /// Left grid node of t: largest i with node(i) <= t, clamped to [0, max_node].
  int left_node(double t, int max_node) const;
};

/// Per-step noise scales beta_i = beta(t_i) * dt for i = 1..N. Throws
/// config_error when any beta_i >= 1 (discretization too coarse) or when the
/// grid horizon disagrees with the schedule horizon.
std::vector<double> discrete_betas(const NoiseSchedule& sched, const TimeGrid& grid);

}  // namespace ctrldiffuse
