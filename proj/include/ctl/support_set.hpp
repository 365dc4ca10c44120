#pragma once

// Sorted, duplicate-free set of dimension indices. This is the only payload
// agents ever put on the wire.

#include <Eigen/Dense>
#include <algorithm>
#include <iterator>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace ctl {

class SupportSet {
 public:
  SupportSet() = default;

  explicit SupportSet(std::vector<int> indices) : idx_(std::move(indices)) {
    std::sort(idx_.begin(), idx_.end());
    idx_.erase(std::unique(idx_.begin(), idx_.end()), idx_.end());
    if (!idx_.empty() && idx_.front() < 0)
      throw std::invalid_argument("SupportSet: negative index");
  }

  static SupportSet full(int d) {
    SupportSet s;
    s.idx_.resize(static_cast<std::size_t>(d));
    std::iota(s.idx_.begin(), s.idx_.end(), 0);
    return s;
  }

  int size() const { return static_cast<int>(idx_.size()); }
  bool empty() const { return idx_.empty(); }
  const std::vector<int>& indices() const { return idx_; }

  bool contains(int j) const {
    return std::binary_search(idx_.begin(), idx_.end(), j);
  }

  SupportSet unite(const SupportSet& other) const {
    SupportSet out;
    std::set_union(idx_.begin(), idx_.end(), other.idx_.begin(),
                   other.idx_.end(), std::back_inserter(out.idx_));
    return out;
  }

  bool is_subset_of(const SupportSet& other) const {
    return std::includes(other.idx_.begin(), other.idx_.end(), idx_.begin(),
                         idx_.end());
  }

  friend bool operator==(const SupportSet&, const SupportSet&) = default;

  // Restriction of a d-dimensional vector to these coordinates.
  Eigen::VectorXd slice(const Eigen::VectorXd& full) const {
    Eigen::VectorXd out(size());
    for (int i = 0; i < size(); ++i) out[i] = full[idx_[static_cast<std::size_t>(i)]];
    return out;
  }

  // Column restriction of a rows×d matrix.
  Eigen::MatrixXd slice_cols(const Eigen::MatrixXd& full) const {
    Eigen::MatrixXd out(full.rows(), size());
    for (int i = 0; i < size(); ++i) out.col(i) = full.col(idx_[static_cast<std::size_t>(i)]);
    return out;
  }

 private:
  std::vector<int> idx_;
};

}  // namespace ctl
