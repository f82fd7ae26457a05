#include "ctrldiffuse/score_model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "ctrldiffuse/errors.hpp"
#include "ctrldiffuse/parallel.hpp"

namespace ctrldiffuse {

LinearGrid::LinearGrid(int dim_, int num_nodes_, int contexts_, double horizon)
    : dim(dim_), num_nodes(num_nodes_), contexts(contexts_), horizon_T(horizon) {
  if (dim < 1 || num_nodes < 2 || contexts < 1 || !(horizon > 0.0))
    throw std::invalid_argument("LinearGrid: bad shape");
  A.assign(static_cast<size_t>(num_nodes) * contexts, Eigen::MatrixXd::Zero(dim, dim));
  b.assign(static_cast<size_t>(num_nodes) * contexts, Eigen::VectorXd::Zero(dim));
}

int LinearGrid::node_of(double t) const {
  int i = static_cast<int>(std::floor(t / node_dt()));
  if (i < 0) i = 0;
  if (i > num_nodes - 1) i = num_nodes - 1;
  return i;
}

Eigen::VectorXd LinearGrid::eval(double t, const Eigen::VectorXd& x, int context) const {
  Eigen::VectorXd out(dim);
  eval_into(node_of(t), x, context, out);
  return out;
}

void LinearGrid::eval_into(int node, const Eigen::VectorXd& x, int context,
                           Eigen::VectorXd& out) const {
  if (context < 0 || context >= contexts)
    throw std::out_of_range("LinearGrid: context index out of range");
  int s = slot(node, context);
  out = b[s];
  out.noalias() += A[s] * x;
}

ScoreModel ScoreModel::analytic_oracle(DataDistribution data, NoiseSchedule sched,
                                       int contexts) {
  ScoreModel m;
  m.analytic_ = true;
  m.contexts_ = contexts;
  m.data_ = std::move(data);
  m.sched_ = sched;
  m.has_data_ = true;
  return m;
}

ScoreModel ScoreModel::linear_grid(LinearGrid grid) {
  ScoreModel m;
  m.analytic_ = false;
  m.contexts_ = grid.contexts;
  m.grid_ = std::move(grid);
  return m;
}

int ScoreModel::dim() const { return analytic_ ? data_.dim() : grid_.dim; }

Eigen::VectorXd ScoreModel::score(double t, const Eigen::VectorXd& x, int context) const {
  if (analytic_) {
    if (context < 0 || context >= contexts_)
      throw std::out_of_range("ScoreModel: context index out of range");
    return true_score(data_, sched_, t, x);
  }
  return grid_.eval(t, x, context);
}

const LinearGrid& ScoreModel::grid() const {
  if (analytic_) throw std::logic_error("ScoreModel: analytic oracle has no LinearGrid");
  return grid_;
}

const DataDistribution& ScoreModel::data() const {
  if (!has_data_) throw std::logic_error("ScoreModel: no data distribution attached");
  return data_;
}

const NoiseSchedule& ScoreModel::schedule() const {
  if (!analytic_) throw std::logic_error("ScoreModel: no schedule attached");
  return sched_;
}

LinearGrid ScoreModel::to_linear_grid(const TimeGrid& grid, int contexts) const {
  if (!analytic_) return grid_;
  if (data_.is_mixture())
    throw std::invalid_argument(
        "to_linear_grid: mixture scores are nonlinear; use the analytic oracle");
  LinearGrid out(data_.dim(), grid.num_steps + 1, contexts, grid.horizon_T);
  for (int i = 0; i <= grid.num_steps; ++i) {
    Marginal m = forward_marginal(data_, sched_, grid.node(i));
    Eigen::MatrixXd prec =
        m.components[0].cov.llt().solve(Eigen::MatrixXd::Identity(out.dim, out.dim));
    for (int c = 0; c < contexts; ++c) {
      out.A[out.slot(i, c)] = -prec;
      out.b[out.slot(i, c)] = prec * m.components[0].mean;
    }
  }
  return out;
}

LinearGrid dsm_train(const ScoreMatchingConfig& config, const DataDistribution& data,
                     const NoiseSchedule& sched, const TimeGrid& grid, int contexts) {
  const int d = data.dim();
  const int n = config.num_samples_per_node;
  if (n < d + 1)
    throw std::invalid_argument("dsm_train: need at least d+1 samples per node");
  if (config.regularization_ridge < 0.0)
    throw std::invalid_argument("dsm_train: ridge must be nonnegative");

  LinearGrid out(d, grid.num_steps + 1, contexts, grid.horizon_T);

  // Per-node ridge regression of the conditional score on [x; 1], nodes
  // independent and parallel.
  std::vector<std::string> node_error(grid.num_steps + 1);
  parallel_for(grid.num_steps, [&](int k) {
    int i = k + 1;  // nodes 1..N; node 0 copies node 1 afterwards
    try {
      double t = grid.node(i);
      double at = sched.alpha_t(t);
      double s2 = 1.0 - sched.alpha_bar(t);
      RngStream rng(derive_stream_seed(config.seed, "dsm", static_cast<std::uint64_t>(i)));

      Eigen::MatrixXd ztz = Eigen::MatrixXd::Zero(d + 1, d + 1);
      Eigen::MatrixXd zty = Eigen::MatrixXd::Zero(d + 1, d);
      Eigen::VectorXd z(d + 1);
      z[d] = 1.0;
      for (int s = 0; s < n; ++s) {
        auto [x0, xt] = sample_forward(data, sched, t, rng);
        z.head(d) = xt;
        Eigen::VectorXd target = -(xt - at * x0) / s2;
        ztz.noalias() += z * z.transpose();
        zty.noalias() += z * target.transpose();
      }
      ztz.diagonal().array() += config.regularization_ridge;
      if (config.regularization_ridge == 0.0) {
        Eigen::FullPivLU<Eigen::MatrixXd> lu(ztz);
        if (lu.rank() < d + 1)
          throw std::runtime_error("dsm_train: normal equations rank-deficient at node " +
                                   std::to_string(i) + " (ridge = 0)");
      }
      Eigen::MatrixXd w = ztz.ldlt().solve(zty);  // (d+1) x d, transpose of [A b]
      for (int c = 0; c < contexts; ++c) {
        out.A[out.slot(i, c)] = w.topRows(d).transpose();
        out.b[out.slot(i, c)] = w.row(d).transpose();
      }
    } catch (const std::exception& e) {
      node_error[i] = e.what();
    }
  });
  for (const auto& msg : node_error)
    if (!msg.empty()) throw std::runtime_error(msg);

  for (int c = 0; c < contexts; ++c) {
    out.A[out.slot(0, c)] = out.A[out.slot(1, c)];
    out.b[out.slot(0, c)] = out.b[out.slot(1, c)];
  }
  return out;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> score_eps_x0_convert(
    const Eigen::VectorXd& s, double t, const Eigen::VectorXd& x,
    const NoiseSchedule& sched) {
  if (t <= 0.0)
    throw std::domain_error("score_eps_x0_convert: sigma_t = 0 at t = 0");
  double st = sched.sigma_t(t);
  double at = sched.alpha_t(t);
  Eigen::VectorXd eps_hat = -st * s;
  Eigen::VectorXd x0_hat = (x + st * st * s) / at;
  return {std::move(eps_hat), std::move(x0_hat)};
}

void save_linear_grid(const LinearGrid& grid, const std::string& path,
                      const double* explore_var) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  char buf[64];
  f << grid.dim << " " << grid.num_nodes << " " << grid.contexts;
  if (explore_var) {
    std::snprintf(buf, sizeof buf, "%.17g", *explore_var);
    f << " " << buf;
  }
  f << "\n";
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    f << buf;
  };
  for (int i = 0; i < grid.num_nodes; ++i) {
    for (int c = 0; c < grid.contexts; ++c) {
      const auto& A = grid.A[grid.slot(i, c)];
      const auto& b = grid.b[grid.slot(i, c)];
      for (int r = 0; r < grid.dim; ++r) {
        for (int j = 0; j < grid.dim; ++j) {
          if (j) f << " ";
          put(A(r, j));
        }
        f << "\n";
      }
      for (int j = 0; j < grid.dim; ++j) {
        if (j) f << " ";
        put(b[j]);
      }
      f << "\n";
    }
  }
  if (!f) throw std::runtime_error("write failed: " + path);
}

LinearGrid load_linear_grid(const std::string& path, double* explore_var_out) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::string header;
  std::getline(f, header);
  std::istringstream hs(header);
  int d = 0, nodes = 0, contexts = 0;
  if (!(hs >> d >> nodes >> contexts))
    throw std::runtime_error("bad header in " + path);
  double ev;
  if (hs >> ev) {
    if (explore_var_out) *explore_var_out = ev;
  } else if (explore_var_out) {
    throw std::runtime_error("missing explore_var in header of " + path);
  }
  // horizon is not persisted; callers rebind it to the configured grid
  LinearGrid grid(d, nodes, contexts, 1.0);
  for (int i = 0; i < nodes; ++i) {
    for (int c = 0; c < contexts; ++c) {
      auto& A = grid.A[grid.slot(i, c)];
      auto& b = grid.b[grid.slot(i, c)];
      for (int r = 0; r < d; ++r)
        for (int j = 0; j < d; ++j)
          if (!(f >> A(r, j))) throw std::runtime_error("truncated matrix data in " + path);
      for (int j = 0; j < d; ++j)
        if (!(f >> b[j])) throw std::runtime_error("truncated matrix data in " + path);
    }
  }
  return grid;
}

}  // namespace ctrldiffuse
