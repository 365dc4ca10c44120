#pragma once

// Adapter for precomputed feature files (e.g. SVD-reduced rating data).
//
// Format: UTF-8 CSV with a one-line header
//
//     d=<int>,reward=<col|fitted>
//
// followed by one row per item holding d feature values plus one response
// value, comma separated.
//
//   reward=col     the stored response is the row's expected reward as-is
//   reward=fitted  a linear model is least-squares fitted to the responses
//                  once and its predictions become the expected rewards
//
// Rounds are formed by sampling K distinct rows uniformly per agent per round.

#include <Eigen/Dense>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include "ctl/bandit_env.hpp"
#include "ctl/errors.hpp"
#include "ctl/rng.hpp"

namespace ctl {

class FeatureDataset {
 public:
  static FeatureDataset load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open feature file: " + path);

    std::string line;
    if (!std::getline(in, line))
      throw ParseError(path + ":1: missing header line");
    FeatureDataset ds;
    ds.parse_header(path, line);

    std::vector<std::vector<double>> rows;
    long lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      rows.push_back(ds.parse_row(path, line, lineno));
    }
    if (rows.empty()) throw ParseError(path + ": no data rows");

    const auto n = static_cast<Eigen::Index>(rows.size());
    ds.features_.resize(n, ds.d_);
    ds.responses_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int j = 0; j < ds.d_; ++j) ds.features_(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      ds.responses_[i] = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(ds.d_)];
    }
    if (ds.fitted_) {
      const Vector theta = ds.features_.colPivHouseholderQr().solve(ds.responses_);
      ds.expected_ = ds.features_ * theta;
      ds.theta_fit_ = theta;
    } else {
      ds.expected_ = ds.responses_;
    }
    return ds;
  }

  int dim() const { return d_; }
  long rows() const { return static_cast<long>(features_.rows()); }
  bool fitted() const { return fitted_; }
  double expected_reward(long row) const { return expected_[row]; }
  const Vector& fitted_theta() const { return theta_fit_; }

  RoundArms sample_round(int K, Rng& rng) const {
    if (K > rows())
      throw std::invalid_argument("sample_round: K exceeds dataset rows");
    const std::vector<int> picks =
        rng.sample_without_replacement(static_cast<int>(rows()), K);
    RoundArms r;
    r.contexts.arms.resize(K, d_);
    r.expected.resize(K);
    for (int k = 0; k < K; ++k) {
      r.contexts.arms.row(k) = features_.row(picks[static_cast<std::size_t>(k)]);
      r.expected[k] = expected_[picks[static_cast<std::size_t>(k)]];
    }
    return r;
  }

 private:
  void parse_header(const std::string& path, const std::string& line) {
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.rfind("d=", 0) != 0)
      throw ParseError(path + ":1: header must be d=<int>,reward=<col|fitted>");
    const std::string dims = line.substr(2, comma - 2);
    char* end = nullptr;
    const long d = std::strtol(dims.c_str(), &end, 10);
    if (end == dims.c_str() || *end != '\0' || d < 1)
      throw ParseError(path + ":1: bad dimension '" + dims + "'");
    d_ = static_cast<int>(d);
    const std::string mode = line.substr(comma + 1);
    if (mode == "reward=col") fitted_ = false;
    else if (mode == "reward=fitted") fitted_ = true;
    else throw ParseError(path + ":1: bad reward mode '" + mode + "'");
  }

  std::vector<double> parse_row(const std::string& path,
                                const std::string& line, long lineno) const {
    std::vector<double> vals;
    vals.reserve(static_cast<std::size_t>(d_) + 1);
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) comma = line.size();
      const std::string field = line.substr(pos, comma - pos);
      char* end = nullptr;
      const double v = std::strtod(field.c_str(), &end);
      if (end == field.c_str() || *end != '\0')
        throw ParseError(path + ":" + std::to_string(lineno) +
                         ": field '" + field + "' is not a number");
      vals.push_back(v);
      pos = comma + 1;
      if (comma == line.size()) break;
    }
    if (vals.size() != static_cast<std::size_t>(d_) + 1)
      throw ParseError(path + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(d_ + 1) + " values, got " +
                       std::to_string(vals.size()));
    return vals;
  }

  int d_ = 0;
  bool fitted_ = false;
  Matrix features_;
  Vector responses_;
  Vector expected_;
  Vector theta_fit_;
};

}  // namespace ctl
