#pragma once

// Synthetic environment: hidden sparse parameter, correlated Gaussian context
// sets, noisy linear rewards, and ground-truth instantaneous regret.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "ctl/rng.hpp"
#include "ctl/sparse_solver.hpp"
#include "ctl/support_set.hpp"

namespace ctl {

struct EnvConfig {
  int d = 100;   // ambient dimension
  int K = 10;    // arms per round
  int s0 = 5;    // non-zeros in the hidden parameter
  double rho2 = 0.3;                  // off-diagonal covariance of the contexts
  double s_A = 5.0;                   // infinity-norm cap on every arm
  double noise_sd = std::sqrt(0.05);  // reward noise standard deviation
  std::uint64_t seed = 0;
};

struct SparseParameter {
  Vector theta;
  SupportSet support;
  int s0 = 0;
};

struct ContextSet {
  Matrix arms;  // K × d, one arm per row
};

// Support drawn uniformly without replacement, non-zeros i.i.d. U[0.5, 2].
inline SparseParameter gen_parameter(const EnvConfig& cfg, Rng& rng) {
  if (cfg.s0 < 1 || cfg.s0 > cfg.d)
    throw std::invalid_argument("gen_parameter: s0 must be in [1, d]");
  SparseParameter p;
  p.s0 = cfg.s0;
  p.support = SupportSet(rng.sample_without_replacement(cfg.d, cfg.s0));
  p.theta = Vector::Zero(cfg.d);
  for (int j : p.support.indices()) p.theta[j] = rng.uniform(0.5, 2.0);
  return p;
}

// One context row before the infinity-norm rescale. Sampling
// x = sqrt(1-rho2) g + sqrt(rho2) z 1 with g ~ N(0, I) and a shared scalar
// z ~ N(0, 1) realizes covariance (1-rho2) I + rho2 11^T without a d×d
// factorization.
inline Vector sample_context_row_raw(int d, double rho2, Rng& rng) {
  Vector x(d);
  for (int j = 0; j < d; ++j) x[j] = rng.normal();
  const double z = rng.normal();
  const double a = std::sqrt(1.0 - rho2);
  const double b = std::sqrt(rho2);
  for (int j = 0; j < d; ++j) x[j] = a * x[j] + b * z;
  return x;
}

// K mutually independent rows, each downscaled (direction preserved) only
// when its infinity-norm exceeds s_A.
inline ContextSet gen_contexts(const EnvConfig& cfg, Rng& rng) {
  ContextSet out;
  out.arms.resize(cfg.K, cfg.d);
  for (int k = 0; k < cfg.K; ++k) {
    Vector row = sample_context_row_raw(cfg.d, cfg.rho2, rng);
    const double m = row.lpNorm<Eigen::Infinity>();
    if (m > cfg.s_A) {
      row *= cfg.s_A / m;
      // keep the bound exact against rounding in the rescale
      row = row.cwiseMax(-cfg.s_A).cwiseMin(cfg.s_A);
    }
    out.arms.row(k) = row.transpose();
  }
  if (out.arms.lpNorm<Eigen::Infinity>() > cfg.s_A)
    throw std::logic_error("gen_contexts: infinity-norm bound violated");
  return out;
}

inline double reward(const Vector& arm, const SparseParameter& param,
                     double noise_sd, Rng& rng) {
  if (arm.size() != param.theta.size())
    throw std::invalid_argument("reward: dimension mismatch");
  return arm.dot(param.theta) + noise_sd * rng.normal();
}

// Gap to the best available arm under the true parameter; non-negative.
inline double instant_regret(const ContextSet& contexts, int chosen,
                             const SparseParameter& param) {
  const auto K = contexts.arms.rows();
  if (chosen < 0 || chosen >= K)
    throw std::invalid_argument("instant_regret: arm index out of range");
  const Vector values = contexts.arms * param.theta;
  return values.maxCoeff() - values[chosen];
}

// One round's payload for a single agent: the arm set plus each arm's
// expected reward under the environment's ground truth.
struct RoundArms {
  ContextSet contexts;
  Vector expected;
};

inline RoundArms synthetic_round(const EnvConfig& cfg,
                                 const SparseParameter& param, Rng& rng) {
  RoundArms r;
  r.contexts = gen_contexts(cfg, rng);
  r.expected = r.contexts.arms * param.theta;
  return r;
}

}  // namespace ctl
