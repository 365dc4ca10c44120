#pragma once

// Per-agent state machine shared by the centralized and decentralized
// algorithms: greedy play on the active support via ridge regression, a
// full-dimensional history feeding the sync-time Lasso, and support adoption
// with a ridge rebuild.

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "ctl/bandit_env.hpp"
#include "ctl/comm.hpp"
#include "ctl/sparse_solver.hpp"
#include "ctl/support_set.hpp"

namespace ctl {

struct SyncParams {
  double lambda0 = 0.1;  // base regularization weight
  double xi = 2.0;       // geometric schedule base, > 1
  CommMode mode = CommMode::centralized;
  int N = 1;
};

// lambda_t = lambda0 sqrt(2 log t log d / t); zero at t = 1.
inline double lambda_schedule(double t, double lambda0, double d) {
  return lambda0 * std::sqrt(2.0 * std::log(t) * std::log(d) / t);
}

// Centralized runs threshold at N lambda_t, decentralized at 2 lambda_t.
inline double threshold_value(const SyncParams& p, double lambda_t) {
  return p.mode == CommMode::centralized ? p.N * lambda_t : 2.0 * lambda_t;
}

// First index attaining the maximum.
inline int argmax_lowest(const Vector& scores) {
  int best = 0;
  for (int k = 1; k < scores.size(); ++k)
    if (scores[k] > scores[best]) best = k;
  return best;
}

// Full-dimensional log of chosen contexts and rewards; append-only.
struct AgentHistory {
  std::vector<Vector> contexts;
  std::vector<double> rewards;
  std::size_t size() const { return rewards.size(); }
};

class Agent {
 public:
  Agent(int id, int d)
      : id_(id),
        d_(d),
        active_support_(SupportSet::full(d)),
        ridge_(RidgeState::identity(active_support_)),
        theta_hat_(Vector::Zero(d)),
        lasso_warm_(Vector::Zero(d)) {}

  int id() const { return id_; }
  int dim() const { return d_; }
  const AgentHistory& history() const { return history_; }
  const RidgeState& ridge() const { return ridge_; }
  const SupportSet& active_support() const { return active_support_; }
  const Vector& theta_hat() const { return theta_hat_; }
  int fallback_count() const { return fallback_count_; }

  void refresh_estimate() { theta_hat_ = ridge_estimate(ridge_); }

  // Greedy on the reduced coordinates; ties resolve to the lowest arm index.
  int select_arm(const ContextSet& contexts) const {
    const std::vector<int>& idx = active_support_.indices();
    Vector scores = Vector::Zero(contexts.arms.rows());
    for (Eigen::Index k = 0; k < contexts.arms.rows(); ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < idx.size(); ++i)
        s += contexts.arms(k, idx[i]) * theta_hat_[static_cast<Eigen::Index>(i)];
      scores[k] = s;
    }
    return argmax_lowest(scores);
  }

  // Logs the full-dimensional chosen arm and updates the reduced ridge state.
  void observe(const Vector& full_arm, double reward) {
    history_.contexts.push_back(full_arm);
    history_.rewards.push_back(reward);
    ridge_update(ridge_, active_support_.slice(full_arm), reward);
  }

  // Sync-time Lasso on the full d-dimensional history, then magnitude
  // thresholding (strict). Warm-started from the previous sync's solution.
  // With no data yet there is nothing to reduce on: returns the full set.
  SupportSet local_support_estimate(double lambda_t, double threshold,
                                    LassoConfig cfg) {
    if (history_.size() == 0) return SupportSet::full(d_);
    const auto t = static_cast<Eigen::Index>(history_.size());
    Matrix X(t, d_);
    for (Eigen::Index s = 0; s < t; ++s)
      X.row(s) = history_.contexts[static_cast<std::size_t>(s)].transpose();
    const Vector y = Eigen::Map<const Vector>(history_.rewards.data(), t);
    cfg.lambda = lambda_t;
    LassoResult fit = lasso_fit(X, y, cfg, &lasso_warm_);
    lasso_warm_ = fit.coef;
    std::vector<int> keep;
    for (int j = 0; j < d_; ++j)
      if (std::abs(fit.coef[j]) > threshold) keep.push_back(j);
    return SupportSet(std::move(keep));
  }

  // Adopts the aggregated support and rebuilds (M, b) from the stored history
  // restricted to it. An empty set degenerates to {0} so play can continue;
  // the event is counted as a warning.
  void adopt_support(SupportSet next) {
    if (next.empty()) {
      next = SupportSet(std::vector<int>{0});
      ++fallback_count_;
    }
    active_support_ = std::move(next);
    ridge_ = ridge_from_history(active_support_, history_.contexts,
                                history_.rewards);
    theta_hat_ = ridge_estimate(ridge_);
  }

 private:
  int id_;
  int d_;
  AgentHistory history_;
  SupportSet active_support_;
  RidgeState ridge_;
  Vector theta_hat_;
  Vector lasso_warm_;
  int fallback_count_ = 0;
};

}  // namespace ctl
