#include "ctrldiffuse/schedule.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ctrldiffuse/errors.hpp"

namespace ctrldiffuse {

NoiseSchedule NoiseSchedule::constant(double beta, double T) {
  NoiseSchedule s;
  s.kind = Kind::Constant;
  s.beta_min = beta;
  s.beta_max = beta;
  s.horizon_T = T;
  if (!(beta > 0.0) || !(T > 0.0))
    throw std::invalid_argument("NoiseSchedule: need beta > 0 and T > 0");
  return s;
}

NoiseSchedule NoiseSchedule::linear(double beta_min, double beta_max, double T) {
  NoiseSchedule s;
  s.kind = Kind::Linear;
  s.beta_min = beta_min;
  s.beta_max = beta_max;
  s.horizon_T = T;
  if (!(beta_min > 0.0) || !(beta_max >= beta_min) || !(T > 0.0))
    throw std::invalid_argument("NoiseSchedule: need 0 < beta_min <= beta_max and T > 0");
  return s;
}

void NoiseSchedule::check_time(double t) const {
  if (!(t >= 0.0) || !(t <= horizon_T))
    throw std::domain_error("schedule time " + std::to_string(t) + " outside [0, " +
                            std::to_string(horizon_T) + "]");
}

double NoiseSchedule::beta_at(double t) const {
  check_time(t);
  if (kind == Kind::Constant) return beta_min;
  return beta_min + (beta_max - beta_min) * t / horizon_T;
}

void NoiseSchedule::sde_coeffs(double t, const Eigen::VectorXd& x,
                               Eigen::VectorXd& drift_out, double& diffusion_out) const {
  double b = beta_at(t);
  drift_out = -0.5 * b * x;
  diffusion_out = std::sqrt(b);
}

double NoiseSchedule::g(double t) const { return std::sqrt(beta_at(t)); }

double NoiseSchedule::g_squared(double t) const { return beta_at(t); }

double NoiseSchedule::alpha_bar(double t) const {
  check_time(t);
  double integral;
  if (kind == Kind::Constant) {
    integral = beta_min * t;
  } else {
    integral = beta_min * t + (beta_max - beta_min) * t * t / (2.0 * horizon_T);
  }
  return std::exp(-integral);
}

double NoiseSchedule::alpha_t(double t) const { return std::sqrt(alpha_bar(t)); }

double NoiseSchedule::sigma_t(double t) const { return std::sqrt(1.0 - alpha_bar(t)); }

double NoiseSchedule::snr_lambda(double t) const {
  check_time(t);
  if (t == 0.0) throw std::domain_error("snr_lambda: infinite SNR at t = 0 (sigma_0 = 0)");
  double ab = alpha_bar(t);
  return std::log(ab / (1.0 - ab));
}

TimeGrid::TimeGrid(int N, double T) : num_steps(N), horizon_T(T) {
  if (N < 1) throw std::invalid_argument("TimeGrid: N must be >= 1");
  if (!(T > 0.0)) throw std::invalid_argument("TimeGrid: T must be > 0");
}

std::vector<double> TimeGrid::nodes() const {
  std::vector<double> out(num_steps + 1);
  for (int i = 0; i <= num_steps; ++i) out[i] = node(i);
  return out;
}

int TimeGrid::left_node(double t, int max_node) const {
  int i = static_cast<int>(std::floor(t / dt()));
  if (i < 0) i = 0;
  if (i > max_node) i = max_node;
  return i;
}

std::vector<double> discrete_betas(const NoiseSchedule& sched, const TimeGrid& grid) {
  if (std::abs(grid.horizon_T - sched.horizon_T) > 1e-12 * sched.horizon_T)
    throw config_error("discrete_betas: grid horizon does not match schedule horizon");
  std::vector<double> betas(grid.num_steps);
  double dt = grid.dt();
  for (int i = 1; i <= grid.num_steps; ++i) {
    double b = sched.beta_at(grid.node(i)) * dt;
    if (b >= 1.0)
      throw config_error("discrete_betas: beta_" + std::to_string(i) + " = " +
                         std::to_string(b) + " >= 1; discretization too coarse");
    betas[i - 1] = b;
  }
  return betas;
}

}  // namespace ctrldiffuse
