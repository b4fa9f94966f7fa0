#include "wander/louvain.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace wander {

namespace {

// Adjacency with self-loop weights kept separately; used at every level.
struct Level {
  std::vector<std::vector<std::pair<std::size_t, double>>> adj;
  std::vector<double> self_loop;
  std::vector<double> degree;  // includes 2x self loop
  double total = 0.0;          // 2m
};

Level make_level(const WeightedGraph& g) {
  Level lv;
  lv.adj.resize(g.node_count);
  lv.self_loop.assign(g.node_count, 0.0);
  lv.degree.assign(g.node_count, 0.0);
  for (const auto& e : g.edges) {
    if (e.u == e.v) {
      lv.self_loop[e.u] += e.weight;
      lv.degree[e.u] += 2.0 * e.weight;
    } else {
      lv.adj[e.u].emplace_back(e.v, e.weight);
      lv.adj[e.v].emplace_back(e.u, e.weight);
      lv.degree[e.u] += e.weight;
      lv.degree[e.v] += e.weight;
    }
  }
  lv.total = std::accumulate(lv.degree.begin(), lv.degree.end(), 0.0);
  return lv;
}

// Local moving phase. Returns true if any node changed community.
bool local_moves(const Level& lv, std::vector<std::size_t>& community) {
  const std::size_t n = lv.adj.size();
  std::vector<double> tot(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) tot[community[i]] += lv.degree[i];

  constexpr double kMinGain = 1e-12;
  bool any_move = false;
  bool moved = true;
  std::vector<double> link(n, 0.0);
  std::vector<std::size_t> touched;
  while (moved) {
    moved = false;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t home = community[i];
      const double ki = lv.degree[i];
      touched.clear();
      for (const auto& [j, w] : lv.adj[i]) {
        const std::size_t c = community[j];
        if (link[c] == 0.0) touched.push_back(c);
        link[c] += w;
      }
      tot[home] -= ki;

      const auto gain = [&](std::size_t c) { return link[c] - tot[c] * ki / lv.total; };
      std::size_t best = home;
      double best_gain = gain(home);
      const double stay_gain = best_gain;
      std::sort(touched.begin(), touched.end());
      for (std::size_t c : touched) {
        const double g = gain(c);
        if (g > best_gain || (g == best_gain && c < best)) {
          best = c;
          best_gain = g;
        }
      }
      if (best != home && !(best_gain > stay_gain + kMinGain)) best = home;

      tot[best] += ki;
      community[i] = best;
      if (best != home) {
        moved = true;
        any_move = true;
      }
      for (std::size_t c : touched) link[c] = 0.0;
    }
  }
  return any_move;
}

}  // namespace

double modularity(const WeightedGraph& g, const std::vector<std::size_t>& community_of) {
  const Level lv = make_level(g);
  if (lv.total == 0.0) return 0.0;
  std::map<std::size_t, double> inside, tot;
  for (std::size_t i = 0; i < g.node_count; ++i) {
    tot[community_of[i]] += lv.degree[i];
    inside[community_of[i]] += 2.0 * lv.self_loop[i];
  }
  for (const auto& e : g.edges)
    if (e.u != e.v && community_of[e.u] == community_of[e.v]) inside[community_of[e.u]] += 2.0 * e.weight;
  double q = 0.0;
  for (const auto& [c, t] : tot) q += inside[c] / lv.total - (t / lv.total) * (t / lv.total);
  return q;
}

std::vector<std::vector<std::size_t>> louvain_cluster(const WeightedGraph& g) {
  // membership[original node] = node id at the current level
  std::vector<std::size_t> membership(g.node_count);
  std::iota(membership.begin(), membership.end(), std::size_t{0});

  WeightedGraph current = g;
  while (current.node_count > 0) {
    const Level lv = make_level(current);
    if (lv.total == 0.0) break;
    std::vector<std::size_t> community(current.node_count);
    std::iota(community.begin(), community.end(), std::size_t{0});
    if (!local_moves(lv, community)) break;

    // Renumber communities by first appearance.
    std::vector<std::size_t> renumber(current.node_count, current.node_count);
    std::size_t next = 0;
    for (std::size_t i = 0; i < current.node_count; ++i)
      if (renumber[community[i]] == current.node_count) renumber[community[i]] = next++;
    for (auto& m : membership) m = renumber[community[m]];

    std::map<std::pair<std::size_t, std::size_t>, double> merged;
    for (const auto& e : current.edges) {
      std::size_t a = renumber[community[e.u]];
      std::size_t b = renumber[community[e.v]];
      if (a > b) std::swap(a, b);
      merged[{a, b}] += e.weight;
    }
    WeightedGraph aggregated;
    aggregated.node_count = next;
    for (const auto& [key, w] : merged) aggregated.edges.push_back({key.first, key.second, w});
    current = std::move(aggregated);
  }

  std::vector<std::vector<std::size_t>> groups(current.node_count);
  for (std::size_t i = 0; i < g.node_count; ++i) groups[membership[i]].push_back(i);
  std::erase_if(groups, [](const auto& grp) { return grp.empty(); });
  std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return groups;
}

}  // namespace wander
