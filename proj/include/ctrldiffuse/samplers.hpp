#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ctrldiffuse/rng.hpp"
#include "ctrldiffuse/schedule.hpp"
#include "ctrldiffuse/score_model.hpp"

namespace ctrldiffuse {

struct SamplerSpec {
  enum class Kind { ReverseSDE, ProbFlowODE, DDPM, DDIM };
  Kind kind = Kind::ReverseSDE;
  double eta = 1.0;  // ReverseSDE stochasticity in [0,1]; ignored otherwise
  TimeGrid grid;
  std::uint64_t seed = 0;

  std::string name() const;
};

/// One generation run in reverse time: states X_0..X_N on the RL time axis
/// (X_0 is the prior draw). `noises` holds the per-step Gaussian draws, one
/// row per step; empty for deterministic kinds. Replaying the recorded noises
/// reproduces the states bit-identically.
struct Trajectory {
  std::vector<double> times;
  Eigen::MatrixXd states;  // (N+1) x d
  Eigen::MatrixXd noises;  // N x d or 0 x 0
};

/// Draw from the VP prior N(0, I_d).
Eigen::VectorXd sample_prior(int dim, RngStream& rng);

/// Dispatch on spec.kind; rng supplies the prior draw and any stepping noise.
Trajectory rollout_sampler(const ScoreModel& score, const NoiseSchedule& sched,
                           const SamplerSpec& spec, RngStream& rng);

/// Re-run from a fixed prior draw and recorded noises (pass an empty matrix
/// for deterministic kinds). Also the coupling device: feeding the same noise
/// matrix to DDPM and to ReverseSDE(eta=1) yields pathwise-comparable runs.
Trajectory rollout_sampler_replay(const ScoreModel& score, const NoiseSchedule& sched,
                                  const SamplerSpec& spec, const Eigen::VectorXd& x0,
                                  const Eigen::MatrixXd& noises);

Trajectory reverse_sde_rollout(const ScoreModel& score, const NoiseSchedule& sched,
                               const SamplerSpec& spec, RngStream& rng);
Trajectory prob_flow_rollout(const ScoreModel& score, const NoiseSchedule& sched,
                             const SamplerSpec& spec, RngStream& rng);
Trajectory ddpm_rollout(const ScoreModel& score, const NoiseSchedule& sched,
                        const SamplerSpec& spec, RngStream& rng);
Trajectory ddim_rollout(const ScoreModel& score, const NoiseSchedule& sched,
                        const SamplerSpec& spec, RngStream& rng);

/// One DDIM step from diffusion time t_from to t_to < t_from in the
/// predicted-x0 form; the t_to = 0 endpoint returns x0_hat itself.
Eigen::VectorXd ddim_step(const NoiseSchedule& sched, double t_from, double t_to,
                          const Eigen::VectorXd& x, const Eigen::VectorXd& score_val);

/// Terminal-moment summary per sampler and coordinate. Target columns compare
/// against the data law when provided, else NaN.
struct SamplerMomentRow {
  std::string sampler;
  double eta = 0.0;
  int paths = 0;
  int coord = 0;
  double mean = 0.0;
  double var = 0.0;
  double target_mean = 0.0;
  double target_var = 0.0;
  double abs_mean_err = 0.0;
  double abs_var_err = 0.0;
};

/// Runs num_paths rollouts per spec (per-path streams derived from spec.seed,
/// so identical specs produce identical rows) and tabulates terminal moments.
std::vector<SamplerMomentRow> sampler_report(const ScoreModel& score,
                                             const NoiseSchedule& sched,
                                             const std::vector<SamplerSpec>& specs,
                                             int num_paths,
                                             const DataDistribution* target_data);

}  // namespace ctrldiffuse
