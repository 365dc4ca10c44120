#pragma once

// Flat key-value experiment configuration files plus validation. Unknown
// keys are rejected so typos cannot silently fall back to defaults.

#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include "ctl/errors.hpp"
#include "ctl/experiment.hpp"

namespace ctl {
namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& key, const std::string& val) {
  char* end = nullptr;
  const double v = std::strtod(val.c_str(), &end);
  if (end == val.c_str() || *end != '\0')
    throw ConfigError("key '" + key + "': '" + val + "' is not a number");
  return v;
}

inline long parse_long(const std::string& key, const std::string& val) {
  char* end = nullptr;
  const long v = std::strtol(val.c_str(), &end, 10);
  if (end == val.c_str() || *end != '\0')
    throw ConfigError("key '" + key + "': '" + val + "' is not an integer");
  return v;
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& val) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(val.c_str(), &end, 10);
  if (end == val.c_str() || *end != '\0')
    throw ConfigError("key '" + key + "': '" + val + "' is not an unsigned integer");
  return v;
}

inline void apply_key(ExperimentConfig& cfg, const std::string& key,
                      const std::string& val) {
  if (key == "d") cfg.env.d = static_cast<int>(parse_long(key, val));
  else if (key == "K") cfg.env.K = static_cast<int>(parse_long(key, val));
  else if (key == "s0") cfg.env.s0 = static_cast<int>(parse_long(key, val));
  else if (key == "rho2") cfg.env.rho2 = parse_double(key, val);
  else if (key == "s_A") cfg.env.s_A = parse_double(key, val);
  else if (key == "noise_sd") cfg.env.noise_sd = parse_double(key, val);
  else if (key == "algo") cfg.algo = parse_algo(val);
  else if (key == "N") cfg.N = static_cast<int>(parse_long(key, val));
  else if (key == "T") cfg.T = parse_long(key, val);
  else if (key == "lambda0") cfg.lambda0 = parse_double(key, val);
  else if (key == "xi") cfg.xi = parse_double(key, val);
  else if (key == "replicas") cfg.replicas = static_cast<int>(parse_long(key, val));
  else if (key == "seed_base") cfg.seed_base = parse_u64(key, val);
  else if (key == "out_dir") cfg.out_dir = val;
  else if (key == "lasso_tol") cfg.lasso_tol = parse_double(key, val);
  else if (key == "lasso_max_iters") cfg.lasso_max_iters = static_cast<int>(parse_long(key, val));
  else if (key == "feature_file") cfg.feature_file = val;
  else throw ConfigError("unknown key '" + key + "'");
}

}  // namespace detail

// Lines are `key = value`; blank lines and `#` comments are skipped.
inline ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  ExperimentConfig cfg;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected `key = value`");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    try {
      detail::apply_key(cfg, key, val);
    } catch (const ConfigError& e) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

// Checks every invariant and resolves forced fields (single-agent baselines
// always run with N = 1). Throws one ConfigError listing all problems.
inline void validate_config(ExperimentConfig& cfg) {
  if (is_single_agent(cfg.algo)) cfg.N = 1;
  std::vector<std::string> problems;
  const auto bad = [&problems](const std::string& p) { problems.push_back(p); };

  if (cfg.env.d < 1) bad("d must be >= 1");
  if (cfg.env.K < 2) bad("K must be >= 2");
  if (cfg.env.s0 < 1 || cfg.env.s0 > cfg.env.d) bad("s0 must be in [1, d]");
  if (cfg.env.rho2 < 0.0 || cfg.env.rho2 >= 1.0) bad("rho2 must be in [0, 1)");
  if (cfg.env.s_A <= 0.0) bad("s_A must be > 0");
  if (cfg.env.noise_sd < 0.0) bad("noise_sd must be >= 0");
  if (cfg.N < 1) bad("N must be >= 1");
  if (cfg.T < 2) bad("T must be >= 2");
  if (cfg.lambda0 <= 0.0) bad("lambda0 must be > 0");
  if (cfg.xi <= 1.0) bad("xi must be > 1");
  if (cfg.replicas < 1) bad("replicas must be >= 1");
  if (cfg.out_dir.empty()) bad("out_dir must not be empty");
  if (cfg.lasso_tol <= 0.0) bad("lasso_tol must be > 0");
  if (cfg.lasso_max_iters < 1) bad("lasso_max_iters must be >= 1");

  if (!problems.empty()) {
    std::string msg = "invalid configuration:";
    for (const std::string& p : problems) msg += "\n  - " + p;
    throw ConfigError(msg);
  }
}

}  // namespace ctl
