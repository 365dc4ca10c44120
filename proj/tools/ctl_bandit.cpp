// CLI harness: seeded bandit runs with CSV outputs, plus matched-seed
// comparisons across algorithms.

#include <CLI11.hpp>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include "ctl/config.hpp"
#include "ctl/experiment.hpp"

namespace {

struct CliOptions {
  std::string config_path;
  std::string algo;
  std::string out_dir;
  std::string algos;
  long long seed = -1;
  int replicas = -1;
  bool quiet = false;
  bool verbose = false;
};

void add_common(CLI::App* sub, CliOptions& opt) {
  sub->add_option("--config", opt.config_path, "experiment config file")->required();
  sub->add_option("--seed", opt.seed, "override seed_base");
  sub->add_option("--out", opt.out_dir, "override out_dir");
  sub->add_option("--replicas", opt.replicas, "override replica count");
  sub->add_flag("--quiet", opt.quiet, "suppress normal output");
  sub->add_flag("--verbose", opt.verbose, "per-replica progress");
}

ctl::ExperimentConfig resolve(const CliOptions& opt) {
  ctl::ExperimentConfig cfg = ctl::load_config_file(opt.config_path);
  if (!opt.algo.empty()) cfg.algo = ctl::parse_algo(opt.algo);
  if (opt.seed >= 0) cfg.seed_base = static_cast<std::uint64_t>(opt.seed);
  if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
  if (opt.replicas > 0) cfg.replicas = opt.replicas;
  ctl::validate_config(cfg);
  return cfg;
}

struct RunResult {
  ctl::ReplicaSummary summary;
  std::vector<ctl::RegretTrace> traces;
};

RunResult run_all_replicas(const ctl::ExperimentConfig& cfg, bool verbose) {
  RunResult out;
  for (int r = 0; r < cfg.replicas; ++r) {
    const std::uint64_t rs =
        ctl::derive_seed(cfg.seed_base, {static_cast<std::uint64_t>(r)});
    out.traces.push_back(ctl::run_experiment(cfg, rs));
    if (verbose)
      std::fprintf(stderr, "[%s] replica %d/%d done (final mean cum regret %.4f)\n",
                   ctl::to_string(cfg.algo).c_str(), r + 1, cfg.replicas,
                   out.traces.back().cum.col(cfg.T - 1).mean());
  }
  out.summary = ctl::aggregate_replicas(out.traces);
  return out;
}

void print_run_line(const ctl::ExperimentConfig& cfg, const RunResult& res) {
  long comm = 0;
  for (long c : res.summary.comm_totals) comm += c;
  std::printf("algo=%s T=%ld N=%d replicas=%d final_mean_cum_regret=%.6f "
              "final_sd=%.6f total_comm_indices=%ld\n",
              ctl::to_string(cfg.algo).c_str(), cfg.T, cfg.N, cfg.replicas,
              res.summary.mean_cum.back(), res.summary.sd_cum.back(), comm);
}

int do_run(const CliOptions& opt) {
  ctl::ExperimentConfig cfg = resolve(opt);
  if (opt.verbose && ctl::is_single_agent(cfg.algo))
    std::fprintf(stderr, "single-agent baseline: N forced to 1\n");
  const RunResult res = run_all_replicas(cfg, opt.verbose);
  ctl::emit_csv(res.summary, res.traces, cfg, cfg.out_dir);
  if (!opt.quiet) print_run_line(cfg, res);
  return 0;
}

int do_compare(const CliOptions& opt) {
  ctl::ExperimentConfig base = resolve(opt);
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : opt.algos) {
    if (c == ',') {
      if (!cur.empty()) tokens.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) tokens.push_back(cur);
  if (tokens.empty()) throw ctl::ConfigError("--algos: empty list");

  namespace fs = std::filesystem;
  const fs::path root = base.out_dir;
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw ctl::IoError("cannot create " + root.string() + ": " + ec.message());

  std::string table = "algo,final_mean_cum_regret,final_sd_cum_regret,mean_total_comm_indices\n";
  for (const std::string& tok : tokens) {
    ctl::ExperimentConfig cfg = base;
    cfg.algo = ctl::parse_algo(tok);
    cfg.out_dir = (root / tok).string();
    ctl::validate_config(cfg);
    const RunResult res = run_all_replicas(cfg, opt.verbose);
    ctl::emit_csv(res.summary, res.traces, cfg, cfg.out_dir);
    double comm = 0;
    for (long c : res.summary.comm_totals) comm += static_cast<double>(c);
    comm /= static_cast<double>(res.summary.comm_totals.size());
    char line[256];
    std::snprintf(line, sizeof line, "%s,%.6f,%.6f,%.1f\n", tok.c_str(),
                  res.summary.mean_cum.back(), res.summary.sd_cum.back(), comm);
    table += line;
    if (!opt.quiet) print_run_line(cfg, res);
  }
  std::ofstream os(root / "comparison.csv");
  if (!os) throw ctl::IoError("cannot write " + (root / "comparison.csv").string());
  os << table;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative thresholded Lasso bandit simulator"};
  app.require_subcommand(1);
  CliOptions opt;

  CLI::App* run = app.add_subcommand("run", "run one algorithm over seeded replicas");
  add_common(run, opt);
  run->add_option("--algo", opt.algo, "cctl|dctl|sa_lasso|th_lasso_single");

  CLI::App* cmp = app.add_subcommand(
      "compare", "run several algorithms on matched environment streams");
  add_common(cmp, opt);
  cmp->add_option("--algos", opt.algos, "comma-separated algorithm list")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return do_run(opt);
    return do_compare(opt);
  } catch (const ctl::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
