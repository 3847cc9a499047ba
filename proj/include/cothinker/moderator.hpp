#pragma once

#include <algorithm>
#include <deque>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cothinker/common.hpp"
#include "cothinker/embedding.hpp"

namespace cothinker {

struct ReferenceSet {
  int agent_id = 0;
  std::vector<int> refs;           // N distinct peers, in candidate-slot order
  std::vector<bool> rewired_flags; // which slots were rewired
};

struct CommGraph {
  int round = 0;
  int node_count = 0;
  std::vector<std::pair<int, int>> edges;  // (u -> v): v references u's output
};

struct GraphStats {
  double clustering = 0.0;           // mean local clustering coefficient
  double path_length = 0.0;          // mean BFS distance over reachable pairs
  double unreachable_fraction = 0.0; // unordered pairs with no path
};

// Similarity-first selection with per-slot Watts-Strogatz style rewiring.
// Slot i holds the i-th nearest peer unless its independent Bernoulli(beta)
// draw fires, in which case it is replaced by a peer drawn uniformly from
// those not already in the set under construction (kept candidates plus
// earlier replacements) and not self.
inline ReferenceSet select_refs(int agent_id, const DistanceMatrix& dmatrix, int ref_count,
                                double beta, Rng& rng) {
  const int m = static_cast<int>(dmatrix.size());
  if (ref_count < 1 || ref_count > m - 1)
    throw Error(Errc::InvalidN, "select_refs: N must satisfy 1 <= N <= M-1");

  std::vector<int> peers;
  peers.reserve(m - 1);
  for (int p = 0; p < m; ++p)
    if (p != agent_id) peers.push_back(p);
  std::stable_sort(peers.begin(), peers.end(), [&](int a, int b) {
    if (dmatrix[agent_id][a] != dmatrix[agent_id][b])
      return dmatrix[agent_id][a] < dmatrix[agent_id][b];
    return a < b;
  });

  std::vector<int> refs(peers.begin(), peers.begin() + ref_count);
  std::vector<bool> flags(ref_count);
  for (int i = 0; i < ref_count; ++i) flags[i] = rng.next_unit() < beta;

  std::set<int> members;  // kept candidates + replacements chosen so far
  for (int i = 0; i < ref_count; ++i)
    if (!flags[i]) members.insert(refs[i]);

  for (int i = 0; i < ref_count; ++i) {
    if (!flags[i]) continue;
    std::vector<int> pool;
    for (int p : peers)
      if (!members.count(p)) pool.push_back(p);
    if (pool.empty()) {
      flags[i] = false;  // keep the candidate
      members.insert(refs[i]);
      continue;
    }
    refs[i] = pool[static_cast<size_t>(rng.next_below(pool.size()))];
    members.insert(refs[i]);
  }
  return ReferenceSet{agent_id, std::move(refs), std::move(flags)};
}

inline CommGraph build_round_graph(const std::vector<ReferenceSet>& refsets, int round) {
  const int m = static_cast<int>(refsets.size());
  CommGraph g;
  g.round = round;
  g.node_count = m;
  for (int v = 0; v < m; ++v) {
    const ReferenceSet& rs = refsets[v];
    if (rs.agent_id != v)
      throw Error(Errc::MalformedRefSet, "refsets must be ordered by agent id");
    std::set<int> seen;
    for (int u : rs.refs) {
      if (u == v)
        throw Error(Errc::MalformedRefSet, "agent " + std::to_string(v) + " references itself");
      if (u < 0 || u >= m)
        throw Error(Errc::MalformedRefSet, "reference id out of range");
      if (!seen.insert(u).second)
        throw Error(Errc::MalformedRefSet, "duplicate reference for agent " + std::to_string(v));
      g.edges.emplace_back(u, v);
    }
  }
  // Fixed in-degree: every refset contributes exactly its own edges.
  if (m > 0) {
    const size_t n = refsets.front().refs.size();
    for (const auto& rs : refsets)
      if (rs.refs.size() != n)
        throw Error(Errc::MalformedRefSet, "inconsistent reference counts across agents");
  }
  return g;
}

// Metrics on the underlying undirected simple graph. Clustering is the mean
// over nodes of closed/possible triads (0 for degree < 2); path length is the
// mean BFS distance over reachable unordered pairs, with the unreachable
// fraction reported separately.
inline GraphStats graph_stats(const CommGraph& g) {
  const int m = g.node_count;
  std::vector<std::set<int>> adj(m);
  for (auto [u, v] : g.edges) {
    adj[u].insert(v);
    adj[v].insert(u);
  }

  GraphStats stats;
  double cc_sum = 0.0;
  for (int v = 0; v < m; ++v) {
    const auto& nb = adj[v];
    const size_t k = nb.size();
    if (k < 2) continue;
    int closed = 0;
    for (auto it = nb.begin(); it != nb.end(); ++it)
      for (auto jt = std::next(it); jt != nb.end(); ++jt)
        if (adj[*it].count(*jt)) ++closed;
    cc_sum += static_cast<double>(closed) / (static_cast<double>(k) * (k - 1) / 2.0);
  }
  stats.clustering = m > 0 ? cc_sum / m : 0.0;

  long long reachable_pairs = 0;
  long long dist_sum = 0;
  for (int s = 0; s < m; ++s) {
    std::vector<int> dist(m, -1);
    std::deque<int> queue{s};
    dist[s] = 0;
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      for (int w : adj[v])
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          queue.push_back(w);
        }
    }
    for (int t = s + 1; t < m; ++t)
      if (dist[t] > 0) {
        ++reachable_pairs;
        dist_sum += dist[t];
      }
  }
  const long long total_pairs = static_cast<long long>(m) * (m - 1) / 2;
  stats.path_length =
      reachable_pairs > 0 ? static_cast<double>(dist_sum) / reachable_pairs : 0.0;
  stats.unreachable_fraction =
      total_pairs > 0 ? static_cast<double>(total_pairs - reachable_pairs) / total_pairs : 0.0;
  return stats;
}

}  // namespace cothinker
