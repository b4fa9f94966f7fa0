#include <doctest.h>

#include <algorithm>
#include <functional>
#include <limits>

#include "gen.hpp"
#include "wander/louvain.hpp"

using namespace wander;

namespace {

std::vector<std::size_t> labels_of(const std::vector<std::vector<std::size_t>>& communities, std::size_t n) {
  std::vector<std::size_t> of(n, std::numeric_limits<std::size_t>::max());
  for (std::size_t c = 0; c < communities.size(); ++c)
    for (std::size_t v : communities[c]) of[v] = c;
  return of;
}

// Best modularity over every set partition (restricted growth strings).
double best_modularity(const WeightedGraph& g) {
  std::vector<std::size_t> label(g.node_count, 0);
  double best = -1.0;
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t used) {
    if (i == g.node_count) {
      best = std::max(best, modularity(g, label));
      return;
    }
    for (std::size_t c = 0; c <= used && c < g.node_count; ++c) {
      label[i] = c;
      rec(i + 1, std::max(used, c + 1));
    }
  };
  rec(0, 0);
  return best;
}

WeightedGraph clique_pair() {
  WeightedGraph g{10, {}};
  for (std::size_t base : {0u, 5u})
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = i + 1; j < 5; ++j) g.edges.push_back({base + i, base + j, 1.0});
  g.edges.push_back({4, 5, 0.1});
  return g;
}

}  // namespace

TEST_CASE("two cliques joined by a weak edge") {
  const auto c = louvain_cluster(clique_pair());
  REQUIRE(c.size() == 2);
  CHECK(c[0] == std::vector<std::size_t>{0, 1, 2, 3, 4});
  CHECK(c[1] == std::vector<std::size_t>{5, 6, 7, 8, 9});
}

TEST_CASE("degenerate graphs") {
  CHECK(louvain_cluster(WeightedGraph{}).empty());
  CHECK(louvain_cluster(WeightedGraph{1, {}}) == std::vector<std::vector<std::size_t>>{{0}});
  // Isolated nodes stay alone.
  CHECK(louvain_cluster(WeightedGraph{3, {}}).size() == 3);
}

TEST_CASE("modularity of simple partitions") {
  const WeightedGraph g = clique_pair();
  std::vector<std::size_t> all(10, 0);
  CHECK(modularity(g, all) == doctest::Approx(0.0));
  std::vector<std::size_t> split{0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
  CHECK(modularity(g, split) > 0.45);
}

void check_partition(const std::vector<std::vector<std::size_t>>& communities, std::size_t n) {
  std::vector<std::size_t> seen;
  for (const auto& c : communities) {
    REQUIRE_FALSE(c.empty());
    CHECK(std::is_sorted(c.begin(), c.end()));
    seen.insert(seen.end(), c.begin(), c.end());
  }
  for (std::size_t k = 1; k < communities.size(); ++k) CHECK(communities[k - 1][0] < communities[k][0]);
  std::sort(seen.begin(), seen.end());
  std::vector<std::size_t> expected(n);
  for (std::size_t k = 0; k < n; ++k) expected[k] = k;
  CHECK(seen == expected);
}

TEST_CASE("louvain on arbitrary small graphs") {
  testgen::Gen g(31);
  for (int i = 0; i < 150; ++i) {
    WeightedGraph graph{static_cast<std::size_t>(g.integer(2, 9)), {}};
    const double p = g.real(0.2, 0.7);
    for (std::size_t u = 0; u < graph.node_count; ++u)
      for (std::size_t v = u + 1; v < graph.node_count; ++v)
        if (g.coin(p)) graph.edges.push_back({u, v, g.real(0.05, 1.0)});
    if (graph.edges.empty()) continue;

    const auto communities = louvain_cluster(graph);
    check_partition(communities, graph.node_count);
    std::vector<std::size_t> singletons(graph.node_count);
    for (std::size_t k = 0; k < singletons.size(); ++k) singletons[k] = k;
    const double q = modularity(graph, labels_of(communities, graph.node_count));
    CHECK(q >= modularity(graph, singletons));
    CHECK(q <= best_modularity(graph) + 1e-12);
    CHECK(louvain_cluster(graph) == communities);
  }
}

TEST_CASE("louvain is near-optimal on clustered graphs") {
  // Two to four planted groups, dense inside, sparse and weak across.
  testgen::Gen g(32);
  for (int i = 0; i < 300; ++i) {
    WeightedGraph graph{static_cast<std::size_t>(g.integer(4, 10)), {}};
    const int k = std::min(4, g.integer(2, static_cast<int>(graph.node_count) / 2));
    std::vector<int> group(graph.node_count);
    for (std::size_t v = 0; v < group.size(); ++v) group[v] = static_cast<int>(v) % k;
    std::shuffle(group.begin(), group.end(), g.engine());
    for (std::size_t u = 0; u < graph.node_count; ++u)
      for (std::size_t v = u + 1; v < graph.node_count; ++v) {
        const bool same = group[u] == group[v];
        if (g.coin(same ? 0.85 : 0.1)) graph.edges.push_back({u, v, same ? g.real(0.4, 1.0) : g.real(0.02, 0.2)});
      }

    const auto communities = louvain_cluster(graph);
    check_partition(communities, graph.node_count);
    const double q = modularity(graph, labels_of(communities, graph.node_count));
    const double opt = best_modularity(graph);
    CHECK(q <= opt + 1e-12);
    CHECK(q >= 0.9 * opt - 1e-12);
  }
}
