#pragma once

// Numerical kernels shared by all agents and baselines: Lasso via cyclic
// coordinate descent on the objective
//
//     (1/t) ||y - X theta||_2^2 + lambda ||theta||_1
//
// and ridge regression as running sufficient statistics (M, b) with
// M = I + sum a a^T, b = sum y a and estimate M^{-1} b.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ctl/support_set.hpp"

namespace ctl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using DesignMatrix = Eigen::MatrixXd;  // t observations × d features

struct LassoConfig {
  double lambda = 0.0;
  int max_iters = 10'000;  // full coordinate sweeps
  double tol = 1e-7;       // max |coordinate change| per sweep
};

struct LassoResult {
  Vector coef;
  int sweeps = 0;
  bool converged = false;
};

inline double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

inline double lasso_objective(const DesignMatrix& X, const Vector& y,
                              double lambda, const Vector& theta) {
  const double t = static_cast<double>(X.rows());
  return (y - X * theta).squaredNorm() / t + lambda * theta.lpNorm<1>();
}

// Cyclic coordinate descent with an optional warm start. The quadratic term's
// gradient carries the factor 2/t, so the coordinate update is
//   theta_j = soft((2/t) X_j^T r_partial, lambda) / ((2/t) ||X_j||^2)
// and theta = 0 is optimal exactly when lambda >= max_j |(2/t) X_j^T y|.
inline LassoResult lasso_fit(const DesignMatrix& X, const Vector& y,
                             const LassoConfig& cfg,
                             const Vector* warm_start = nullptr) {
  const Eigen::Index t = X.rows();
  const Eigen::Index d = X.cols();
  if (t < 1) throw std::invalid_argument("lasso_fit: need at least one observation");
  if (y.size() != t) throw std::invalid_argument("lasso_fit: response length mismatch");
  if (!X.allFinite() || !y.allFinite())
    throw std::invalid_argument("lasso_fit: non-finite input");
  if (cfg.lambda < 0.0 || cfg.tol <= 0.0 || cfg.max_iters < 1)
    throw std::invalid_argument("lasso_fit: bad config");
  if (warm_start != nullptr && warm_start->size() != d)
    throw std::invalid_argument("lasso_fit: warm start dimension mismatch");

  LassoResult res;
  res.coef = warm_start != nullptr ? *warm_start : Vector::Zero(d);
  Vector& theta = res.coef;

  const double scale = 2.0 / static_cast<double>(t);
  Vector col_sq(d);
  for (Eigen::Index j = 0; j < d; ++j) col_sq[j] = X.col(j).squaredNorm();

  Vector r = y - X * theta;  // residual, maintained across coordinate updates

  for (int sweep = 1; sweep <= cfg.max_iters; ++sweep) {
    double max_step = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      const double old = theta[j];
      if (col_sq[j] == 0.0) {
        // Zero column: the fit is unaffected, the penalty picks 0.
        if (old != 0.0) {
          theta[j] = 0.0;
          max_step = std::max(max_step, std::abs(old));
        }
        continue;
      }
      const double corr = X.col(j).dot(r) + col_sq[j] * old;  // X_j^T r_{-j}
      const double next =
          soft_threshold(scale * corr, cfg.lambda) / (scale * col_sq[j]);
      if (next != old) {
        r += X.col(j) * (old - next);
        theta[j] = next;
        max_step = std::max(max_step, std::abs(next - old));
      }
    }
    res.sweeps = sweep;
    if (max_step <= cfg.tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

// Running ridge statistics over the agent's active support.
// M starts at identity and only accumulates rank-1 outer products, so it
// stays symmetric positive-definite with M - I >= 0.
struct RidgeState {
  SupportSet support;
  Matrix M;
  Vector b;

  static RidgeState identity(SupportSet support) {
    RidgeState s;
    const int k = support.size();
    s.support = std::move(support);
    s.M = Matrix::Identity(k, k);
    s.b = Vector::Zero(k);
    return s;
  }
};

inline void ridge_update(RidgeState& state, const Vector& a, double reward) {
  if (a.size() != state.M.rows())
    throw std::invalid_argument("ridge_update: dimension mismatch");
  state.M.noalias() += a * a.transpose();
  state.b.noalias() += reward * a;
}

// Solves M theta = b through a Cholesky factorization; never forms M^{-1}.
inline Vector ridge_estimate(const RidgeState& state) {
  return state.M.llt().solve(state.b);
}

// Batch construction from a stored full-dimensional history, restricted to
// `support`. Accumulates directly rather than chaining ridge_update so the
// incremental path has an in-tree counterpart to be checked against.
inline RidgeState ridge_from_history(SupportSet support,
                                     const std::vector<Vector>& contexts,
                                     const std::vector<double>& rewards) {
  if (contexts.size() != rewards.size())
    throw std::invalid_argument("ridge_from_history: history length mismatch");
  RidgeState s = RidgeState::identity(std::move(support));
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    const Vector a = s.support.slice(contexts[i]);
    s.M.noalias() += a * a.transpose();
    s.b.noalias() += rewards[i] * a;
  }
  return s;
}

}  // namespace ctl
