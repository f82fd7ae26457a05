#include "ctrldiffuse/samplers.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "ctrldiffuse/errors.hpp"
#include "ctrldiffuse/parallel.hpp"

namespace ctrldiffuse {

namespace {

void check_finite(const Eigen::VectorXd& x, int step) {
  if (!x.allFinite())
    throw divergence_error("sampler state non-finite at step " + std::to_string(step),
                           step);
}

// Shared Euler core for the reverse SDE; eta = 0 is exactly the
// probability-flow ODE step, so the two kinds are bit-identical there.
Trajectory euler_reverse(const ScoreModel& score, const NoiseSchedule& sched,
                         const SamplerSpec& spec, Eigen::VectorXd x,
                         const Eigen::MatrixXd* replay, RngStream* rng) {
  const int N = spec.grid.num_steps;
  const int d = static_cast<int>(x.size());
  const double dt = spec.grid.dt();
  const double T = spec.grid.horizon_T;
  const double eta = spec.kind == SamplerSpec::Kind::ProbFlowODE ? 0.0 : spec.eta;
  const bool stochastic = eta > 0.0;

  Trajectory traj;
  traj.times = spec.grid.nodes();
  traj.states.resize(N + 1, d);
  traj.noises.resize(stochastic ? N : 0, d);
  traj.states.row(0) = x;

  Eigen::VectorXd s(d);
  for (int i = 0; i < N; ++i) {
    double tt = T - spec.grid.node(i);  // diffusion time
    double beta = sched.beta_at(tt);
    s = score.score(tt, x);
    x += (0.5 * beta * x + 0.5 * (1.0 + eta * eta) * beta * s) * dt;
    if (stochastic) {
      double scale = eta * std::sqrt(beta * dt);
      for (int j = 0; j < d; ++j) {
        double z = replay ? (*replay)(i, j) : rng->normal();
        traj.noises(i, j) = z;
        x[j] += scale * z;
      }
    }
    check_finite(x, i);
    traj.states.row(i + 1) = x;
  }
  return traj;
}

Trajectory ddpm_chain(const ScoreModel& score, const NoiseSchedule& sched,
                      const SamplerSpec& spec, Eigen::VectorXd x,
                      const Eigen::MatrixXd* replay, RngStream* rng) {
  const int N = spec.grid.num_steps;
  const int d = static_cast<int>(x.size());
  std::vector<double> betas = discrete_betas(sched, spec.grid);

  Trajectory traj;
  traj.times = spec.grid.nodes();
  traj.states.resize(N + 1, d);
  traj.noises.resize(N, d);
  traj.states.row(0) = x;

  Eigen::VectorXd s(d);
  for (int j = 0; j < N; ++j) {
    int i = N - j;  // descending diffusion index
    double bi = betas[i - 1];
    s = score.score(spec.grid.node(i), x);
    x = (x + bi * s) / std::sqrt(1.0 - bi);
    double scale = std::sqrt(bi);
    for (int k = 0; k < d; ++k) {
      double z = replay ? (*replay)(j, k) : rng->normal();
      traj.noises(j, k) = z;
      x[k] += scale * z;
    }
    check_finite(x, j);
    traj.states.row(j + 1) = x;
  }
  return traj;
}

Trajectory ddim_chain(const ScoreModel& score, const NoiseSchedule& sched,
                      const SamplerSpec& spec, Eigen::VectorXd x) {
  const int N = spec.grid.num_steps;
  const int d = static_cast<int>(x.size());

  Trajectory traj;
  traj.times = spec.grid.nodes();
  traj.states.resize(N + 1, d);
  traj.states.row(0) = x;

  for (int j = 0; j < N; ++j) {
    double t_from = spec.grid.node(N - j);
    double t_to = spec.grid.node(N - j - 1);
    Eigen::VectorXd s = score.score(t_from, x);
    x = ddim_step(sched, t_from, t_to, x, s);
    check_finite(x, j);
    traj.states.row(j + 1) = x;
  }
  return traj;
}

Trajectory dispatch(const ScoreModel& score, const NoiseSchedule& sched,
                    const SamplerSpec& spec, Eigen::VectorXd x0,
                    const Eigen::MatrixXd* replay, RngStream* rng) {
  switch (spec.kind) {
    case SamplerSpec::Kind::ReverseSDE:
      if (spec.eta < 0.0 || spec.eta > 1.0)
        throw std::invalid_argument("SamplerSpec: eta must lie in [0,1]");
      return euler_reverse(score, sched, spec, std::move(x0), replay, rng);
    case SamplerSpec::Kind::ProbFlowODE:
      return euler_reverse(score, sched, spec, std::move(x0), replay, rng);
    case SamplerSpec::Kind::DDPM:
      return ddpm_chain(score, sched, spec, std::move(x0), replay, rng);
    case SamplerSpec::Kind::DDIM:
      return ddim_chain(score, sched, spec, std::move(x0));
  }
  throw std::logic_error("unreachable sampler kind");
}

}  // namespace

std::string SamplerSpec::name() const {
  switch (kind) {
    case Kind::ReverseSDE: return "reverse_sde";
    case Kind::ProbFlowODE: return "prob_flow";
    case Kind::DDPM: return "ddpm";
    case Kind::DDIM: return "ddim";
  }
  return "?";
}

Eigen::VectorXd sample_prior(int dim, RngStream& rng) {
  Eigen::VectorXd x(dim);
  for (int i = 0; i < dim; ++i) x[i] = rng.normal();
  return x;
}

Trajectory rollout_sampler(const ScoreModel& score, const NoiseSchedule& sched,
                           const SamplerSpec& spec, RngStream& rng) {
  return dispatch(score, sched, spec, sample_prior(score.dim(), rng), nullptr, &rng);
}

Trajectory rollout_sampler_replay(const ScoreModel& score, const NoiseSchedule& sched,
                                  const SamplerSpec& spec, const Eigen::VectorXd& x0,
                                  const Eigen::MatrixXd& noises) {
  bool needs_noise = spec.kind == SamplerSpec::Kind::DDPM ||
                     (spec.kind == SamplerSpec::Kind::ReverseSDE && spec.eta > 0.0);
  if (needs_noise && (noises.rows() != spec.grid.num_steps || noises.cols() != x0.size()))
    throw std::invalid_argument("rollout_sampler_replay: noise matrix shape mismatch");
  return dispatch(score, sched, spec, x0, needs_noise ? &noises : nullptr, nullptr);
}

Trajectory reverse_sde_rollout(const ScoreModel& score, const NoiseSchedule& sched,
                               const SamplerSpec& spec, RngStream& rng) {
  if (spec.kind != SamplerSpec::Kind::ReverseSDE)
    throw std::invalid_argument("reverse_sde_rollout: wrong spec kind");
  return rollout_sampler(score, sched, spec, rng);
}

Trajectory prob_flow_rollout(const ScoreModel& score, const NoiseSchedule& sched,
                             const SamplerSpec& spec, RngStream& rng) {
  if (spec.kind != SamplerSpec::Kind::ProbFlowODE)
    throw std::invalid_argument("prob_flow_rollout: wrong spec kind");
  return rollout_sampler(score, sched, spec, rng);
}

Trajectory ddpm_rollout(const ScoreModel& score, const NoiseSchedule& sched,
                        const SamplerSpec& spec, RngStream& rng) {
  if (spec.kind != SamplerSpec::Kind::DDPM)
    throw std::invalid_argument("ddpm_rollout: wrong spec kind");
  return rollout_sampler(score, sched, spec, rng);
}

Trajectory ddim_rollout(const ScoreModel& score, const NoiseSchedule& sched,
                        const SamplerSpec& spec, RngStream& rng) {
  if (spec.kind != SamplerSpec::Kind::DDIM)
    throw std::invalid_argument("ddim_rollout: wrong spec kind");
  return rollout_sampler(score, sched, spec, rng);
}

Eigen::VectorXd ddim_step(const NoiseSchedule& sched, double t_from, double t_to,
                          const Eigen::VectorXd& x, const Eigen::VectorXd& score_val) {
  if (!(t_to < t_from))
    throw std::invalid_argument("ddim_step: need t_to < t_from");
  auto [eps_hat, x0_hat] = score_eps_x0_convert(score_val, t_from, x, sched);
  double sig_to = sched.sigma_t(t_to);
  if (sig_to == 0.0) return x0_hat;  // final step: alpha = 1, the update collapses
  double sig_from = sched.sigma_t(t_from);
  double a_from = sched.alpha_t(t_from);
  double a_to = sched.alpha_t(t_to);
  double ratio = sig_to / sig_from;
  return ratio * x + (a_to - a_from * ratio) * x0_hat;
}

std::vector<SamplerMomentRow> sampler_report(const ScoreModel& score,
                                             const NoiseSchedule& sched,
                                             const std::vector<SamplerSpec>& specs,
                                             int num_paths,
                                             const DataDistribution* target_data) {
  const int d = score.dim();
  double nan = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd target_mean = Eigen::VectorXd::Constant(d, nan);
  Eigen::VectorXd target_var = Eigen::VectorXd::Constant(d, nan);
  if (target_data) {
    Marginal m = forward_marginal(*target_data, sched, 0.0);
    target_mean = m.overall_mean();
    target_var = m.overall_cov().diagonal();
  }

  std::vector<SamplerMomentRow> rows;
  for (const auto& spec : specs) {
    Eigen::MatrixXd terminals(num_paths, d);
    parallel_for(num_paths, [&](int p) {
      RngStream rng(derive_stream_seed(
          spec.seed, "sampler/" + spec.name() + "/" + std::to_string(spec.eta),
          static_cast<std::uint64_t>(p)));
      Trajectory traj = rollout_sampler(score, sched, spec, rng);
      terminals.row(p) = traj.states.row(spec.grid.num_steps);
    });
    Eigen::VectorXd mean = terminals.colwise().mean();
    for (int j = 0; j < d; ++j) {
      double var = (terminals.col(j).array() - mean[j]).square().sum() / num_paths;
      SamplerMomentRow row;
      row.sampler = spec.name();
      row.eta = spec.kind == SamplerSpec::Kind::ReverseSDE ? spec.eta : 0.0;
      row.paths = num_paths;
      row.coord = j;
      row.mean = mean[j];
      row.var = var;
      row.target_mean = target_mean[j];
      row.target_var = target_var[j];
      row.abs_mean_err = std::abs(mean[j] - target_mean[j]);
      row.abs_var_err = std::abs(var - target_var[j]);
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace ctrldiffuse
