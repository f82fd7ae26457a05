#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "ctrldiffuse/data.hpp"
#include "ctrldiffuse/rng.hpp"
#include "ctrldiffuse/schedule.hpp"

namespace ctrldiffuse {

/// Piecewise-constant-in-t family of affine maps x -> A x + b, one map per
/// grid node and context. Evaluation between nodes uses the left node. This is
/// the shared representation for score models and policy means.
struct LinearGrid {
  int dim = 0;
  int num_nodes = 0;  // node count, not step count
  int contexts = 1;
  double horizon_T = 1.0;
  std::vector<Eigen::MatrixXd> A;  // [node * contexts + context]
  std::vector<Eigen::VectorXd> b;

  LinearGrid() = default;
  LinearGrid(int dim, int num_nodes, int contexts, double horizon_T);

  int slot(int node, int context) const { return node * contexts + context; }
  double node_dt() const { return horizon_T / (num_nodes - 1); }

  /// Left-node lookup for time t in [0, T].
  int node_of(double t) const;

  Eigen::VectorXd eval(double t, const Eigen::VectorXd& x, int context) const;
  void eval_into(int node, const Eigen::VectorXd& x, int context,
                 Eigen::VectorXd& out) const;
};

/// Score approximation s(t, x, c): either the closed-form oracle for the data
/// distribution or a trained LinearGrid.
class ScoreModel {
 public:
  static ScoreModel analytic_oracle(DataDistribution data, NoiseSchedule sched,
                                    int contexts = 1);
  static ScoreModel linear_grid(LinearGrid grid);

  bool is_analytic() const { return analytic_; }
  int dim() const;
  int contexts() const { return contexts_; }

  Eigen::VectorXd score(double t, const Eigen::VectorXd& x, int context = 0) const;

  /// The trained parameters; throws for analytic oracles.
  const LinearGrid& grid() const;

  /// Exact LinearGrid extraction at the grid nodes. Only Gaussian data admits
  /// a linear score; mixtures throw.
  LinearGrid to_linear_grid(const TimeGrid& grid, int contexts) const;

  const DataDistribution& data() const;
  const NoiseSchedule& schedule() const;

 private:
  ScoreModel() = default;
  bool analytic_ = false;
  int contexts_ = 1;
  DataDistribution data_;
  NoiseSchedule sched_;
  LinearGrid grid_;
  bool has_data_ = false;
};

struct ScoreMatchingConfig {
  enum class Weighting { GSquared, Uniform };
  // The weighting only reweights across nodes in the pooled objective; the
  // per-node least-squares solutions are identical under both options.
  Weighting weighting = Weighting::GSquared;
  int num_samples_per_node = 10000;
  double regularization_ridge = 0.0;
  std::uint64_t seed = 0;
};

/// Denoising score matching: per grid node, ridge least-squares fit of
/// A x_t + b to the conditional score -(x_t - alpha_t x0) / sigma_t^2. The
/// t = 0 node has an undefined target and copies the t_1 solution. Node
/// sampling uses independent streams derived from (seed, node).
LinearGrid dsm_train(const ScoreMatchingConfig& config, const DataDistribution& data,
                     const NoiseSchedule& sched, const TimeGrid& grid, int contexts = 1);

/// Reparameterizations of a score value at (t, x): predicted noise
/// eps_hat = -sigma_t * s and denoised mean x0_hat = (x + sigma_t^2 s) / alpha_t.
/// Throws std::domain_error at t = 0.
std::pair<Eigen::VectorXd, Eigen::VectorXd> score_eps_x0_convert(
    const Eigen::VectorXd& s, double t, const Eigen::VectorXd& x,
    const NoiseSchedule& sched);

/// Flat-text persistence. Header: "d num_nodes contexts [explore_var]", then
/// per node, per context, d rows of A and one row of b, 17 significant digits.
void save_linear_grid(const LinearGrid& grid, const std::string& path,
                      const double* explore_var = nullptr);
LinearGrid load_linear_grid(const std::string& path, double* explore_var_out = nullptr);

}  // namespace ctrldiffuse
