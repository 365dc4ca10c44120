#pragma once

// Synchronization schedule, network topologies (star and random connected
// peer graph), support aggregation, and communication-cost accounting.

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

#include "ctl/rng.hpp"
#include "ctl/support_set.hpp"

namespace ctl {

enum class CommMode { centralized, decentralized };

inline std::string_view to_string(CommMode m) {
  return m == CommMode::centralized ? "centralized" : "decentralized";
}

// Geometric sync grid {round(xi^m) : m >= 1}, duplicates removed, capped at T.
// Exact for integer xi; the rounding keeps the round count logarithmic for
// any real xi > 1.
inline std::vector<long> sync_grid(double xi, long T) {
  if (xi <= 1.0) throw std::invalid_argument("sync_grid: xi must exceed 1");
  std::vector<long> grid;
  for (int m = 1;; ++m) {
    const double p = std::pow(xi, static_cast<double>(m));
    if (p > static_cast<double>(T) + 0.5) break;
    const long g = std::llround(p);
    if (g > T) break;
    if (g >= 1 && (grid.empty() || grid.back() != g)) grid.push_back(g);
  }
  return grid;
}

inline bool is_sync_step(long t, double xi) {
  if (t < 1) throw std::invalid_argument("is_sync_step: t must be >= 1");
  const std::vector<long> grid = sync_grid(xi, t);
  return !grid.empty() && grid.back() == t;
}

class SyncSchedule {
 public:
  SyncSchedule(double xi, long T) : grid_(sync_grid(xi, T)) {}

  bool contains(long t) const {
    return std::binary_search(grid_.begin(), grid_.end(), t);
  }
  const std::vector<long>& rounds() const { return grid_; }
  std::size_t count() const { return grid_.size(); }

 private:
  std::vector<long> grid_;
};

struct Topology {
  enum class Kind { star, peer_graph };

  Kind kind = Kind::star;
  int num_agents = 0;
  std::vector<std::vector<int>> adjacency;  // peer_graph only; sorted lists

  static Topology star(int N) {
    Topology t;
    t.kind = Kind::star;
    t.num_agents = N;
    return t;
  }
};

inline bool is_connected(const std::vector<std::vector<int>>& adj) {
  const int n = static_cast<int>(adj.size());
  if (n == 0) return true;
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int visited = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v : adj[static_cast<std::size_t>(u)]) {
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        ++visited;
        stack.push_back(v);
      }
    }
  }
  return visited == n;
}

// Random connected graph: |E| uniform on {N-1, ..., min(2N, N(N-1)/2)},
// built as a uniform random spanning tree (random Prüfer sequence) plus
// distinct extra edges drawn uniformly from the remaining pairs.
inline Topology gen_random_connected_graph(int N, Rng& rng) {
  if (N < 1) throw std::invalid_argument("gen_random_connected_graph: N >= 1");
  Topology topo;
  topo.kind = Topology::Kind::peer_graph;
  topo.num_agents = N;
  topo.adjacency.assign(static_cast<std::size_t>(N), {});
  if (N == 1) return topo;  // degenerate single node, no edges

  const long max_edges = static_cast<long>(N) * (N - 1) / 2;
  const long target = rng.uniform_int(N - 1, std::min<long>(2L * N, max_edges));

  std::vector<std::pair<int, int>> edges;
  if (N == 2) {
    edges.emplace_back(0, 1);
  } else {
    std::vector<int> seq(static_cast<std::size_t>(N - 2));
    for (int& s : seq) s = static_cast<int>(rng.below(static_cast<std::uint64_t>(N)));
    std::vector<int> degree(static_cast<std::size_t>(N), 1);
    for (int s : seq) ++degree[static_cast<std::size_t>(s)];
    std::priority_queue<int, std::vector<int>, std::greater<>> leaves;
    for (int v = 0; v < N; ++v)
      if (degree[static_cast<std::size_t>(v)] == 1) leaves.push(v);
    for (int s : seq) {
      const int leaf = leaves.top();
      leaves.pop();
      edges.emplace_back(std::min(leaf, s), std::max(leaf, s));
      if (--degree[static_cast<std::size_t>(s)] == 1) leaves.push(s);
    }
    const int a = leaves.top();
    leaves.pop();
    const int b = leaves.top();
    edges.emplace_back(std::min(a, b), std::max(a, b));
  }

  std::vector<char> present(static_cast<std::size_t>(N) * static_cast<std::size_t>(N), 0);
  const auto at = [N](int u, int v) {
    return static_cast<std::size_t>(u) * static_cast<std::size_t>(N) + static_cast<std::size_t>(v);
  };
  for (auto [u, v] : edges) present[at(u, v)] = present[at(v, u)] = 1;

  std::vector<std::pair<int, int>> rest;
  for (int u = 0; u < N; ++u)
    for (int v = u + 1; v < N; ++v)
      if (!present[at(u, v)]) rest.emplace_back(u, v);
  long extra = target - (N - 1);
  for (long i = 0; i < extra; ++i) {
    const auto j = static_cast<std::size_t>(i) +
                   static_cast<std::size_t>(rng.below(rest.size() - static_cast<std::size_t>(i)));
    std::swap(rest[static_cast<std::size_t>(i)], rest[j]);
    edges.push_back(rest[static_cast<std::size_t>(i)]);
  }

  for (auto [u, v] : edges) {
    topo.adjacency[static_cast<std::size_t>(u)].push_back(v);
    topo.adjacency[static_cast<std::size_t>(v)].push_back(u);
  }
  for (auto& nbrs : topo.adjacency) std::sort(nbrs.begin(), nbrs.end());

  if (!is_connected(topo.adjacency))
    throw std::logic_error("gen_random_connected_graph: graph not connected");
  return topo;
}

inline SupportSet server_aggregate(const std::vector<SupportSet>& supports) {
  SupportSet out;
  for (const SupportSet& s : supports) out = out.unite(s);
  return out;
}

// Every agent pulls one uniformly chosen neighbor's estimate and unions it
// with its own. All pulls read the same pre-exchange snapshot, so no union
// cascades within a round. `picked[i]` reports the neighbor agent i pulled
// from (-1 when it has none).
inline std::vector<SupportSet> peer_exchange(
    const Topology& topo, const std::vector<SupportSet>& local,
    std::vector<Rng>& agent_rngs, std::vector<int>* picked = nullptr) {
  if (topo.kind != Topology::Kind::peer_graph)
    throw std::invalid_argument("peer_exchange: topology is not a peer graph");
  const int N = topo.num_agents;
  if (static_cast<int>(local.size()) != N ||
      static_cast<int>(agent_rngs.size()) != N)
    throw std::invalid_argument("peer_exchange: need one support and one rng per agent");
  std::vector<SupportSet> out(static_cast<std::size_t>(N));
  if (picked != nullptr) picked->assign(static_cast<std::size_t>(N), -1);
  for (int i = 0; i < N; ++i) {
    const auto& nbrs = topo.adjacency[static_cast<std::size_t>(i)];
    if (nbrs.empty()) {
      if (N > 1) throw std::logic_error("peer_exchange: isolated node");
      out[static_cast<std::size_t>(i)] = local[static_cast<std::size_t>(i)];
      continue;
    }
    const int j = nbrs[static_cast<std::size_t>(
        agent_rngs[static_cast<std::size_t>(i)].below(nbrs.size()))];
    out[static_cast<std::size_t>(i)] =
        local[static_cast<std::size_t>(i)].unite(local[static_cast<std::size_t>(j)]);
    if (picked != nullptr) (*picked)[static_cast<std::size_t>(i)] = j;
  }
  return out;
}

// Wire payload at a sync round; nothing but dimension indices travels.
struct SyncMessage {
  int sender = 0;  // agent id, or kServerSender for broadcast copies
  SupportSet support;
  long round = 0;
};

inline constexpr int kServerSender = -1;

struct CommRound {
  long t = 0;
  int messages = 0;
  long indices = 0;      // sum of |support| over the round's messages
  long max_message = 0;  // largest single message, in indices
};

class CommLog {
 public:
  const std::vector<CommRound>& rounds() const { return rounds_; }
  void append(CommRound r) { rounds_.push_back(r); }

  long total_indices() const {
    long sum = 0;
    for (const CommRound& r : rounds_) sum += r.indices;
    return sum;
  }

  void to_csv(std::ostream& os, CommMode mode) const {
    os << "t,mode,messages,indices_transmitted\n";
    for (const CommRound& r : rounds_)
      os << r.t << ',' << to_string(mode) << ',' << r.messages << ','
         << r.indices << '\n';
  }

 private:
  std::vector<CommRound> rounds_;
};

// Appends one round's accounting. Callers invoke this only at sync rounds:
// star mode passes N uplink messages plus N broadcast copies, peer mode one
// message per agent's pull.
inline void record_comm(CommLog& log, long t,
                        const std::vector<SyncMessage>& messages) {
  CommRound r;
  r.t = t;
  r.messages = static_cast<int>(messages.size());
  for (const SyncMessage& m : messages) {
    r.indices += m.support.size();
    r.max_message = std::max<long>(r.max_message, m.support.size());
  }
  log.append(r);
}

}  // namespace ctl
