#pragma once

// Orchestrates full bandit runs over seeded replicas: the cooperative
// algorithms (centralized star and decentralized peer-to-peer), single-agent
// Lasso baselines, regret traces, replica aggregation, and CSV output.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ctl/agent.hpp"
#include "ctl/bandit_env.hpp"
#include "ctl/comm.hpp"
#include "ctl/dataset.hpp"
#include "ctl/errors.hpp"
#include "ctl/rng.hpp"

namespace ctl {

enum class Algo { cctl, dctl, sa_lasso, th_lasso_single };

inline std::string to_string(Algo a) {
  switch (a) {
    case Algo::cctl: return "cctl";
    case Algo::dctl: return "dctl";
    case Algo::sa_lasso: return "sa_lasso";
    case Algo::th_lasso_single: return "th_lasso_single";
  }
  return "?";
}

inline Algo parse_algo(const std::string& s) {
  if (s == "cctl") return Algo::cctl;
  if (s == "dctl") return Algo::dctl;
  if (s == "sa_lasso") return Algo::sa_lasso;
  if (s == "th_lasso_single") return Algo::th_lasso_single;
  throw ConfigError("unknown algo '" + s +
                    "' (expected cctl|dctl|sa_lasso|th_lasso_single)");
}

inline bool is_single_agent(Algo a) {
  return a == Algo::sa_lasso || a == Algo::th_lasso_single;
}

struct ExperimentConfig {
  EnvConfig env;
  Algo algo = Algo::cctl;
  int N = 10;
  long T = 1000;
  double lambda0 = 0.1;
  double xi = 2.0;
  int replicas = 10;
  std::uint64_t seed_base = 1;
  std::string out_dir = "out";
  double lasso_tol = 1e-7;
  int lasso_max_iters = 10'000;
  std::string feature_file;  // when set, rounds come from the dataset adapter
};

struct RegretTrace {
  Matrix inst;  // N × T instantaneous regret
  Matrix cum;   // N × T prefix sums along rounds
  CommLog comm;
  SparseParameter param;  // synthetic ground truth; empty for dataset runs
  std::vector<SupportSet> final_supports;  // active support per agent at T
  int fallback_count = 0;
};

// Stream ids under a replica seed; the env stream consumes a fixed number of
// draws per round, so context and noise sequences match across algorithms
// run from the same seeds.
namespace stream {
inline constexpr std::uint64_t parameter = 1;
inline constexpr std::uint64_t graph = 2;
inline constexpr std::uint64_t env = 3;
inline constexpr std::uint64_t comm = 4;
}  // namespace stream

// Per-agent source of rounds: synthetic sources share theta*, dataset sources
// share the loaded feature table.
class ArmSource {
 public:
  virtual ~ArmSource() = default;
  virtual RoundArms next_round() = 0;
  virtual double next_noise() = 0;  // standard normal; caller applies the sd
};

class SyntheticSource final : public ArmSource {
 public:
  SyntheticSource(const EnvConfig& cfg, const SparseParameter& param,
                  std::uint64_t seed)
      : cfg_(cfg), param_(&param), rng_(seed) {}
  RoundArms next_round() override { return synthetic_round(cfg_, *param_, rng_); }
  double next_noise() override { return rng_.normal(); }

 private:
  EnvConfig cfg_;
  const SparseParameter* param_;
  Rng rng_;
};

class DatasetSource final : public ArmSource {
 public:
  DatasetSource(const FeatureDataset& data, int K, std::uint64_t seed)
      : data_(&data), K_(K), rng_(seed) {}
  RoundArms next_round() override { return data_->sample_round(K_, rng_); }
  double next_noise() override { return rng_.normal(); }

 private:
  const FeatureDataset* data_;
  int K_;
  Rng rng_;
};

namespace detail {

struct EnvHandles {
  std::optional<FeatureDataset> data;
  SparseParameter param;
  int d = 0;
  std::vector<std::unique_ptr<ArmSource>> sources;
};

inline EnvHandles make_env(const ExperimentConfig& cfg,
                           std::uint64_t replica_seed, int num_agents) {
  EnvHandles env;
  if (!cfg.feature_file.empty()) {
    env.data = FeatureDataset::load(cfg.feature_file);
    env.d = env.data->dim();
  } else {
    Rng prng(derive_seed(replica_seed, {stream::parameter}));
    env.param = gen_parameter(cfg.env, prng);
    env.d = cfg.env.d;
  }
  for (int i = 0; i < num_agents; ++i) {
    const std::uint64_t es =
        derive_seed(replica_seed, {stream::env, static_cast<std::uint64_t>(i)});
    if (env.data)
      env.sources.push_back(std::make_unique<DatasetSource>(*env.data, cfg.env.K, es));
    else
      env.sources.push_back(std::make_unique<SyntheticSource>(cfg.env, env.param, es));
  }
  return env;
}

inline void finish_trace(RegretTrace& trace) {
  const auto N = trace.inst.rows();
  const auto T = trace.inst.cols();
  trace.cum.resize(N, T);
  for (Eigen::Index i = 0; i < N; ++i) {
    double acc = 0.0;
    for (Eigen::Index t = 0; t < T; ++t) {
      acc += trace.inst(i, t);
      trace.cum(i, t) = acc;
    }
  }
}

}  // namespace detail

// One full cooperative run (centralized star or decentralized peer graph)
// for a single replica.
inline RegretTrace run_ctl(const ExperimentConfig& cfg,
                           std::uint64_t replica_seed) {
  if (cfg.algo != Algo::cctl && cfg.algo != Algo::dctl)
    throw std::invalid_argument("run_ctl: algo must be cctl or dctl");
  const bool decentralized = cfg.algo == Algo::dctl;
  const int N = cfg.N;
  const long T = cfg.T;

  detail::EnvHandles env = detail::make_env(cfg, replica_seed, N);
  const int d = env.d;
  const SyncParams sp{cfg.lambda0, cfg.xi,
                      decentralized ? CommMode::decentralized : CommMode::centralized,
                      N};
  LassoConfig lcfg;
  lcfg.tol = cfg.lasso_tol;
  lcfg.max_iters = cfg.lasso_max_iters;

  Topology topo;
  if (decentralized) {
    Rng grng(derive_seed(replica_seed, {stream::graph}));
    topo = gen_random_connected_graph(N, grng);
  } else {
    topo = Topology::star(N);
  }

  std::vector<Rng> comm_rngs;
  std::vector<Agent> agents;
  comm_rngs.reserve(static_cast<std::size_t>(N));
  agents.reserve(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) {
    comm_rngs.emplace_back(
        derive_seed(replica_seed, {stream::comm, static_cast<std::uint64_t>(i)}));
    agents.emplace_back(i, d);
  }

  const SyncSchedule schedule(cfg.xi, T);
  RegretTrace trace;
  trace.inst = Matrix::Zero(N, T);

  for (long t = 1; t <= T; ++t) {
    for (int i = 0; i < N; ++i) {
      Agent& ag = agents[static_cast<std::size_t>(i)];
      ag.refresh_estimate();
      const RoundArms round = env.sources[static_cast<std::size_t>(i)]->next_round();
      const int k = ag.select_arm(round.contexts);
      const double noise = env.sources[static_cast<std::size_t>(i)]->next_noise();
      const double y = round.expected[k] + cfg.env.noise_sd * noise;
      trace.inst(i, t - 1) = round.expected.maxCoeff() - round.expected[k];
      ag.observe(round.contexts.arms.row(k).transpose(), y);
    }

    if (schedule.contains(t)) {
      const double lam = lambda_schedule(static_cast<double>(t), cfg.lambda0,
                                         static_cast<double>(d));
      const double thr = threshold_value(sp, lam);
      std::vector<SupportSet> locals(static_cast<std::size_t>(N));
      for (int i = 0; i < N; ++i)
        locals[static_cast<std::size_t>(i)] =
            agents[static_cast<std::size_t>(i)].local_support_estimate(lam, thr, lcfg);

      std::vector<SyncMessage> messages;
      std::vector<SupportSet> adopted;
      if (!decentralized) {
        const SupportSet u = server_aggregate(locals);
        for (int i = 0; i < N; ++i)
          messages.push_back({i, locals[static_cast<std::size_t>(i)], t});
        for (int i = 0; i < N; ++i) messages.push_back({kServerSender, u, t});
        adopted.assign(static_cast<std::size_t>(N), u);
      } else {
        std::vector<int> picked;
        adopted = peer_exchange(topo, locals, comm_rngs, &picked);
        for (int i = 0; i < N; ++i)
          if (picked[static_cast<std::size_t>(i)] >= 0)
            messages.push_back(
                {picked[static_cast<std::size_t>(i)],
                 locals[static_cast<std::size_t>(picked[static_cast<std::size_t>(i)])], t});
      }
      record_comm(trace.comm, t, messages);
      for (int i = 0; i < N; ++i)
        agents[static_cast<std::size_t>(i)].adopt_support(adopted[static_cast<std::size_t>(i)]);
    }
  }

  detail::finish_trace(trace);
  trace.param = std::move(env.param);
  for (const Agent& ag : agents) {
    trace.final_supports.push_back(ag.active_support());
    trace.fallback_count += ag.fallback_count();
  }
  return trace;
}

// Sparsity-agnostic single-agent baseline: every round fits the Lasso on the
// full history and plays greedily on the full-dimensional estimate.
inline RegretTrace run_sa_lasso(const ExperimentConfig& cfg,
                                std::uint64_t replica_seed) {
  if (cfg.algo != Algo::sa_lasso)
    throw std::invalid_argument("run_sa_lasso: algo mismatch");
  const long T = cfg.T;
  detail::EnvHandles env = detail::make_env(cfg, replica_seed, 1);
  const int d = env.d;
  LassoConfig lcfg;
  lcfg.tol = cfg.lasso_tol;
  lcfg.max_iters = cfg.lasso_max_iters;

  Matrix X(T, d);
  Vector yv(T);
  Vector warm = Vector::Zero(d);
  Vector coef = Vector::Zero(d);

  RegretTrace trace;
  trace.inst = Matrix::Zero(1, T);

  for (long t = 1; t <= T; ++t) {
    const long n = t - 1;  // observations available at selection time
    if (n > 0) {
      lcfg.lambda = lambda_schedule(static_cast<double>(n), cfg.lambda0,
                                    static_cast<double>(d));
      const LassoResult fit = lasso_fit(X.topRows(n), yv.head(n), lcfg, &warm);
      warm = fit.coef;
      coef = fit.coef;
    }
    const RoundArms round = env.sources[0]->next_round();
    const Vector scores = round.contexts.arms * coef;
    const int k = argmax_lowest(scores);
    const double y = round.expected[k] + cfg.env.noise_sd * env.sources[0]->next_noise();
    trace.inst(0, t - 1) = round.expected.maxCoeff() - round.expected[k];
    X.row(t - 1) = round.contexts.arms.row(k);
    yv[t - 1] = y;
  }

  detail::finish_trace(trace);
  trace.param = std::move(env.param);
  std::vector<int> nz;
  for (int j = 0; j < d; ++j)
    if (coef[j] != 0.0) nz.push_back(j);
  trace.final_supports.push_back(SupportSet(std::move(nz)));
  return trace;
}

// Thresholded single-agent baseline: every round fits the Lasso, keeps the
// coordinates above lambda_t, refits on the survivors, and plays greedily on
// the reduced estimate.
inline RegretTrace run_th_lasso_single(const ExperimentConfig& cfg,
                                       std::uint64_t replica_seed) {
  if (cfg.algo != Algo::th_lasso_single)
    throw std::invalid_argument("run_th_lasso_single: algo mismatch");
  const long T = cfg.T;
  detail::EnvHandles env = detail::make_env(cfg, replica_seed, 1);
  const int d = env.d;
  LassoConfig lcfg;
  lcfg.tol = cfg.lasso_tol;
  lcfg.max_iters = cfg.lasso_max_iters;

  Matrix X(T, d);
  Vector yv(T);
  Vector warm = Vector::Zero(d);
  SupportSet support = SupportSet::full(d);
  Vector reduced = Vector::Zero(d);

  RegretTrace trace;
  trace.inst = Matrix::Zero(1, T);

  for (long t = 1; t <= T; ++t) {
    const long n = t - 1;
    if (n > 0) {
      const double lam = lambda_schedule(static_cast<double>(n), cfg.lambda0,
                                         static_cast<double>(d));
      lcfg.lambda = lam;
      const LassoResult first = lasso_fit(X.topRows(n), yv.head(n), lcfg, &warm);
      warm = first.coef;
      std::vector<int> keep;
      for (int j = 0; j < d; ++j)
        if (std::abs(first.coef[j]) > lam) keep.push_back(j);
      if (keep.empty()) {
        keep.push_back(0);
        ++trace.fallback_count;
      }
      support = SupportSet(std::move(keep));
      const Matrix Xs = support.slice_cols(X.topRows(n));
      Vector ws = support.slice(first.coef);
      const LassoResult second = lasso_fit(Xs, yv.head(n), lcfg, &ws);
      reduced = second.coef;
    }
    const RoundArms round = env.sources[0]->next_round();
    Vector scores;
    if (n == 0) {
      scores = Vector::Zero(round.contexts.arms.rows());
    } else {
      scores = support.slice_cols(round.contexts.arms) * reduced;
    }
    const int k = argmax_lowest(scores);
    const double y = round.expected[k] + cfg.env.noise_sd * env.sources[0]->next_noise();
    trace.inst(0, t - 1) = round.expected.maxCoeff() - round.expected[k];
    X.row(t - 1) = round.contexts.arms.row(k);
    yv[t - 1] = y;
  }

  detail::finish_trace(trace);
  trace.param = std::move(env.param);
  trace.final_supports.push_back(support);
  return trace;
}

inline RegretTrace run_experiment(const ExperimentConfig& cfg,
                                  std::uint64_t replica_seed) {
  switch (cfg.algo) {
    case Algo::cctl:
    case Algo::dctl: return run_ctl(cfg, replica_seed);
    case Algo::sa_lasso: return run_sa_lasso(cfg, replica_seed);
    case Algo::th_lasso_single: return run_th_lasso_single(cfg, replica_seed);
  }
  throw std::invalid_argument("run_experiment: bad algo");
}

// Per-round mean and population standard deviation of cumulative regret,
// averaged over agents first, then across replicas.
struct ReplicaSummary {
  std::vector<double> mean_cum;
  std::vector<double> sd_cum;
  std::vector<long> comm_totals;  // indices transmitted per replica
};

inline ReplicaSummary aggregate_replicas(const std::vector<RegretTrace>& traces) {
  if (traces.empty())
    throw std::invalid_argument("aggregate_replicas: no traces");
  const auto N = traces[0].cum.rows();
  const auto T = traces[0].cum.cols();
  for (const RegretTrace& tr : traces)
    if (tr.cum.rows() != N || tr.cum.cols() != T)
      throw std::invalid_argument("aggregate_replicas: trace shape mismatch");

  ReplicaSummary s;
  s.mean_cum.resize(static_cast<std::size_t>(T));
  s.sd_cum.resize(static_cast<std::size_t>(T));
  const double R = static_cast<double>(traces.size());
  for (Eigen::Index t = 0; t < T; ++t) {
    double m = 0.0;
    for (const RegretTrace& tr : traces) m += tr.cum.col(t).mean();
    m /= R;
    double v = 0.0;
    for (const RegretTrace& tr : traces) {
      const double a = tr.cum.col(t).mean() - m;
      v += a * a;
    }
    s.mean_cum[static_cast<std::size_t>(t)] = m;
    s.sd_cum[static_cast<std::size_t>(t)] = std::sqrt(v / R);
  }
  for (const RegretTrace& tr : traces)
    s.comm_totals.push_back(tr.comm.total_indices());
  return s;
}

namespace detail {

// Shortest representation that parses back to the identical double.
inline std::string fmt_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p);
  if (!os) throw IoError("cannot write " + p.string());
  return os;
}

}  // namespace detail

inline std::string echo_config(const ExperimentConfig& cfg) {
  using detail::fmt_double;
  std::string s;
  s += "algo = " + to_string(cfg.algo) + "\n";
  s += "d = " + std::to_string(cfg.env.d) + "\n";
  s += "K = " + std::to_string(cfg.env.K) + "\n";
  s += "s0 = " + std::to_string(cfg.env.s0) + "\n";
  s += "rho2 = " + fmt_double(cfg.env.rho2) + "\n";
  s += "s_A = " + fmt_double(cfg.env.s_A) + "\n";
  s += "noise_sd = " + fmt_double(cfg.env.noise_sd) + "\n";
  s += "N = " + std::to_string(cfg.N) + "\n";
  s += "T = " + std::to_string(cfg.T) + "\n";
  s += "lambda0 = " + fmt_double(cfg.lambda0) + "\n";
  s += "xi = " + fmt_double(cfg.xi) + "\n";
  s += "replicas = " + std::to_string(cfg.replicas) + "\n";
  s += "seed_base = " + std::to_string(cfg.seed_base) + "\n";
  s += "out_dir = " + cfg.out_dir + "\n";
  s += "lasso_tol = " + fmt_double(cfg.lasso_tol) + "\n";
  s += "lasso_max_iters = " + std::to_string(cfg.lasso_max_iters) + "\n";
  s += "feature_file = " + cfg.feature_file + "\n";
  return s;
}

// Writes summary.csv, trace_<replica>.csv, comm_<replica>.csv, and
// config.echo into out_dir.
inline void emit_csv(const ReplicaSummary& summary,
                     const std::vector<RegretTrace>& traces,
                     const ExperimentConfig& cfg,
                     const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  using detail::fmt_double;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  {
    std::ofstream os = detail::open_out(out_dir / "summary.csv");
    os << "t,mean_cum_regret,sd_cum_regret\n";
    for (std::size_t t = 0; t < summary.mean_cum.size(); ++t)
      os << (t + 1) << ',' << fmt_double(summary.mean_cum[t]) << ','
         << fmt_double(summary.sd_cum[t]) << '\n';
  }

  const CommMode mode =
      cfg.algo == Algo::dctl ? CommMode::decentralized : CommMode::centralized;
  for (std::size_t r = 0; r < traces.size(); ++r) {
    const RegretTrace& tr = traces[r];
    {
      std::ofstream os =
          detail::open_out(out_dir / ("trace_" + std::to_string(r) + ".csv"));
      os << "t,agent,inst_regret,cum_regret\n";
      for (Eigen::Index t = 0; t < tr.inst.cols(); ++t)
        for (Eigen::Index i = 0; i < tr.inst.rows(); ++i)
          os << (t + 1) << ',' << i << ',' << fmt_double(tr.inst(i, t)) << ','
             << fmt_double(tr.cum(i, t)) << '\n';
    }
    {
      std::ofstream os =
          detail::open_out(out_dir / ("comm_" + std::to_string(r) + ".csv"));
      tr.comm.to_csv(os, mode);
    }
  }

  std::ofstream os = detail::open_out(out_dir / "config.echo");
  os << echo_config(cfg);
}

}  // namespace ctl
