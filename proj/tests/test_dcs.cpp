#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <queue>
#include <vector>

#include "vhtwin/dcs.hpp"
#include "vhtwin/rng.hpp"

using namespace vhtwin;

namespace {

RelationshipGraph make_graph(int n, const std::vector<std::tuple<int, int, double>>& edges) {
  RelationshipGraph graph;
  graph.topology.n = n;
  std::vector<std::pair<std::pair<int, int>, double>> sorted;
  for (const auto& [i, j, w] : edges) {
    sorted.push_back({{std::min(i, j), std::max(i, j)}, w});
  }
  std::sort(sorted.begin(), sorted.end());
  for (const auto& [edge, w] : sorted) {
    graph.topology.edges.push_back(edge);
    graph.phi.push_back(w);
  }
  return graph;
}

// Unit-length betweenness oracle: BFS shortest-path counting per pair, then
// per-edge fractions accumulated over unordered pairs.
std::map<std::pair<int, int>, double> betweenness_oracle(const RelationshipGraph& graph) {
  const int n = graph.topology.n;
  std::vector<std::vector<int>> adj(n);
  for (const auto& [i, j] : graph.topology.edges) {
    adj[i].push_back(j);
    adj[j].push_back(i);
  }

  std::map<std::pair<int, int>, double> score;
  for (const auto& e : graph.topology.edges) score[e] = 0.0;

  for (int s = 0; s < n; ++s) {
    for (int t = s + 1; t < n; ++t) {
      // Count shortest s-t paths through each edge by dynamic programming
      // over the BFS layers: paths_through(e) = sigma_s(u) * sigma_t(v).
      auto bfs = [&](int src) {
        std::vector<int> dist(n, -1);
        std::vector<double> sigma(n, 0.0);
        std::queue<int> q;
        dist[src] = 0;
        sigma[src] = 1.0;
        q.push(src);
        while (!q.empty()) {
          const int u = q.front();
          q.pop();
          for (const int v : adj[u]) {
            if (dist[v] == -1) {
              dist[v] = dist[u] + 1;
              q.push(v);
            }
            if (dist[v] == dist[u] + 1) sigma[v] += sigma[u];
          }
        }
        return std::pair{dist, sigma};
      };
      const auto [dist_s, sigma_s] = bfs(s);
      const auto [dist_t, sigma_t] = bfs(t);
      if (dist_s[t] < 0) continue;  // disconnected pair contributes nothing
      const double total = sigma_s[t];
      for (const auto& [i, j] : graph.topology.edges) {
        double through = 0.0;
        if (dist_s[i] + 1 + dist_t[j] == dist_s[t]) through += sigma_s[i] * sigma_t[j];
        if (dist_s[j] + 1 + dist_t[i] == dist_s[t]) through += sigma_s[j] * sigma_t[i];
        score[{i, j}] += through / total;
      }
    }
  }
  return score;
}

// Definition-route modularity: (1/2W) sum_ij [A_ij - k_i k_j / 2W] delta(c_i c_j).
double modularity_oracle(const RelationshipGraph& graph, const std::vector<int>& labels,
                         bool weighted) {
  const int n = graph.topology.n;
  SquareMatrix a(n, 0.0);
  std::vector<double> degree(n, 0.0);
  double two_w = 0.0;
  for (std::size_t e = 0; e < graph.topology.edges.size(); ++e) {
    const auto& [i, j] = graph.topology.edges[e];
    const double w = weighted ? graph.phi[e] : 1.0;
    a.at(i, j) = a.at(j, i) = w;
    degree[i] += w;
    degree[j] += w;
    two_w += 2.0 * w;
  }
  double q = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (labels[i] != labels[j]) continue;
      q += a.at(i, j) - degree[i] * degree[j] / two_w;
    }
  }
  return q / two_w;
}

ClusterAssignment assignment_from(const std::vector<int>& labels) {
  ClusterAssignment a;
  a.labels = labels;
  a.num_clusters = *std::max_element(labels.begin(), labels.end()) + 1;
  return a;
}

// Enumerates all partitions of {0..n-1} as restricted growth strings.
void for_each_partition(int n, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> labels(n, 0);
  std::function<void(int, int)> rec = [&](int index, int max_used) {
    if (index == n) {
      fn(labels);
      return;
    }
    for (int c = 0; c <= max_used + 1; ++c) {
      labels[index] = c;
      rec(index + 1, std::max(max_used, c));
    }
  };
  labels[0] = 0;
  rec(1, 0);
}

const std::vector<std::tuple<int, int, double>> kTwoTriangles = {
    {0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}, {3, 4, 1.0}, {4, 5, 1.0}, {3, 5, 1.0}};

}  // namespace

TEST_CASE("edge betweenness on a path graph") {
  const auto graph = make_graph(3, {{0, 1, 1.0}, {1, 2, 1.0}});
  const auto scores = edge_betweenness(graph, LengthMode::unit);
  CHECK(scores[0] == doctest::Approx(2.0));  // edge 0-1
  CHECK(scores[1] == doctest::Approx(2.0));  // edge 1-2
}

TEST_CASE("edge betweenness on a triangle is uniform") {
  const auto graph = make_graph(3, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}});
  for (const double s : edge_betweenness(graph, LengthMode::unit)) {
    CHECK(s == doctest::Approx(1.0));
  }
}

TEST_CASE("bridge between two triangles dominates betweenness") {
  auto edges = kTwoTriangles;
  edges.push_back({2, 3, 1.0});
  const auto graph = make_graph(6, edges);
  const auto scores = edge_betweenness(graph, LengthMode::unit);
  const auto oracle = betweenness_oracle(graph);

  double bridge_score = 0.0;
  double best_other = 0.0;
  for (std::size_t e = 0; e < graph.topology.edges.size(); ++e) {
    CHECK(scores[e] == doctest::Approx(oracle.at(graph.topology.edges[e])).epsilon(1e-12));
    if (graph.topology.edges[e] == std::pair{2, 3}) {
      bridge_score = scores[e];
    } else {
      best_other = std::max(best_other, scores[e]);
    }
  }
  CHECK(bridge_score == doctest::Approx(9.0));  // all 3x3 cross pairs
  CHECK(bridge_score > best_other);
}

TEST_CASE("edge betweenness matches the oracle on random graphs") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto topo = generate_regular_topology(12, 4, seed);
    RelationshipGraph graph;
    graph.topology = topo;
    graph.phi.assign(topo.edges.size(), 1.0);
    const auto scores = edge_betweenness(graph, LengthMode::unit);
    const auto oracle = betweenness_oracle(graph);
    for (std::size_t e = 0; e < topo.edges.size(); ++e) {
      CHECK(scores[e] == doctest::Approx(oracle.at(topo.edges[e])).epsilon(1e-9));
    }
  }
}

TEST_CASE("inverse-phi lengths reroute shortest paths") {
  // Heavy edges are short; the path 0-1-2 (phi 10 each) beats the direct
  // 0-2 edge (phi 1, length 1 > 0.2).
  const auto graph = make_graph(3, {{0, 1, 10.0}, {1, 2, 10.0}, {0, 2, 1.0}});
  const auto scores = edge_betweenness(graph, LengthMode::inverse_phi);
  CHECK(scores[0] == doctest::Approx(2.0));  // 0-1 carries pairs (0,1) and (0,2)
  CHECK(scores[2] == doctest::Approx(2.0));  // 1-2 carries pairs (1,2) and (0,2)
  CHECK(scores[1] == doctest::Approx(0.0));  // direct 0-2 unused
}

TEST_CASE("modularity of the two-triangle split is one half") {
  const auto graph = make_graph(6, kTwoTriangles);
  const auto split = assignment_from({0, 0, 0, 1, 1, 1});
  CHECK(modularity(graph, split, false) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(modularity(graph, split, true) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("single community has zero modularity") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto topo = generate_regular_topology(10, 4, seed);
    RelationshipGraph graph;
    graph.topology = topo;
    Rng rng(seed);
    for (std::size_t e = 0; e < topo.edges.size(); ++e) graph.phi.push_back(rng.uniform(0.1, 5.0));
    const auto one = assignment_from(std::vector<int>(10, 0));
    CHECK(modularity(graph, one, true) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(modularity(graph, one, false) == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("modularity matches the definition oracle on random partitions") {
  Rng rng(314);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 6 + static_cast<int>(rng.bounded(8));
    const int degree = (n % 2 == 0) ? 3 + static_cast<int>(rng.bounded(2)) : 4;
    const auto topo = generate_regular_topology(n, degree, trial);
    RelationshipGraph graph;
    graph.topology = topo;
    for (std::size_t e = 0; e < topo.edges.size(); ++e) graph.phi.push_back(rng.uniform(0.1, 3.0));

    std::vector<int> labels(n);
    const int c = 1 + static_cast<int>(rng.bounded(4));
    for (int i = 0; i < n; ++i) labels[i] = static_cast<int>(rng.bounded(c));
    // Compact labels so they are contiguous.
    std::map<int, int> remap;
    for (int& l : labels) {
      if (!remap.count(l)) remap.emplace(l, static_cast<int>(remap.size()));
      l = remap.at(l);
    }
    const auto assignment = assignment_from(labels);
    for (const bool weighted : {false, true}) {
      CHECK(modularity(graph, assignment, weighted) ==
            doctest::Approx(modularity_oracle(graph, labels, weighted)).epsilon(1e-12));
    }
  }
}

TEST_CASE("cluster_fixed separates two cliques across a weak bridge") {
  std::vector<std::tuple<int, int, double>> edges;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      edges.push_back({i, j, 1.0});
      edges.push_back({i + 4, j + 4, 1.0});
    }
  }
  edges.push_back({3, 4, 0.01});
  const auto graph = make_graph(8, edges);

  for (const auto strategy : {FixedStrategy::min_weight, FixedStrategy::max_betweenness}) {
    const auto got = cluster_fixed(graph, 2, strategy);
    CHECK(got.num_clusters == 2);
    for (int i = 0; i < 4; ++i) {
      CHECK(got.labels[i] == 0);
      CHECK(got.labels[i + 4] == 1);
    }
  }
}

TEST_CASE("cluster_fixed degenerate targets") {
  const auto topo = generate_regular_topology(8, 4, 2);
  RelationshipGraph graph;
  graph.topology = topo;
  graph.phi.assign(topo.edges.size(), 1.0);

  const auto one = cluster_fixed(graph, 1, FixedStrategy::min_weight);
  CHECK(one.num_clusters == 1);

  const auto all = cluster_fixed(graph, 8, FixedStrategy::min_weight);
  CHECK(all.num_clusters == 8);
  for (int i = 0; i < 8; ++i) CHECK(all.labels[i] == i);

  CHECK_THROWS_AS(cluster_fixed(graph, 9, FixedStrategy::min_weight), std::invalid_argument);
  CHECK_THROWS_AS(cluster_fixed(graph, 0, FixedStrategy::min_weight), std::invalid_argument);

  const auto halves = make_graph(4, {{0, 1, 1.0}, {2, 3, 1.0}});
  CHECK_THROWS_AS(cluster_fixed(halves, 1, FixedStrategy::min_weight), std::invalid_argument);
}

TEST_CASE("adaptive clustering recovers disconnected triangles") {
  const auto graph = make_graph(6, kTwoTriangles);
  std::vector<double> q_trace;
  const auto got = cluster_adaptive(graph, 17, &q_trace);
  CHECK(got.num_clusters == 2);
  CHECK(got.labels == std::vector<int>{0, 0, 0, 1, 1, 1});
  CHECK(modularity(graph, got, true) == doctest::Approx(0.5).epsilon(1e-9));

  // Brute force over all 203 partitions of 6 nodes confirms the optimum.
  double best = -1.0;
  for_each_partition(6, [&](const std::vector<int>& labels) {
    best = std::max(best, modularity_oracle(graph, labels, true));
  });
  CHECK(best == doctest::Approx(0.5).epsilon(1e-12));

  for (std::size_t i = 1; i < q_trace.size(); ++i) CHECK(q_trace[i] >= q_trace[i - 1]);
}

TEST_CASE("adaptive clustering merges a single edge") {
  const auto graph = make_graph(2, {{0, 1, 1.0}});
  const auto got = cluster_adaptive(graph, 0);
  CHECK(got.num_clusters == 1);
  // Both partitions enumerated: singletons give -0.5, the merge gives 0.
  CHECK(modularity(graph, got, true) == doctest::Approx(0.0));
  CHECK(modularity_oracle(graph, {0, 1}, true) == doctest::Approx(-0.5));
}

TEST_CASE("adaptive clustering keeps a complete graph whole") {
  std::vector<std::tuple<int, int, double>> edges;
  for (int i = 0; i < 5; ++i) {
    for (int j = i + 1; j < 5; ++j) edges.push_back({i, j, 1.0});
  }
  const auto graph = make_graph(5, edges);
  const auto got = cluster_adaptive(graph, 3);
  CHECK(got.num_clusters == 1);

  // No partition of K5 beats the single community.
  double best = -1.0;
  for_each_partition(5, [&](const std::vector<int>& labels) {
    best = std::max(best, modularity_oracle(graph, labels, true));
  });
  CHECK(best == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("adaptive output never falls below the singleton partition") {
  Rng rng(2718);
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto topo = generate_regular_topology(14, 4, seed);
    RelationshipGraph graph;
    graph.topology = topo;
    for (std::size_t e = 0; e < topo.edges.size(); ++e) graph.phi.push_back(rng.uniform(0.05, 4.0));

    std::vector<int> singleton(14);
    for (int i = 0; i < 14; ++i) singleton[i] = i;
    const auto got = cluster_adaptive(graph, seed);
    CHECK(modularity(graph, got, true) >=
          modularity(graph, assignment_from(singleton), true) - 1e-12);
  }
}

TEST_CASE("both strategies are invariant under uniform phi scaling") {
  Rng rng(99);
  const auto topo = generate_regular_topology(12, 4, 5);
  RelationshipGraph graph;
  graph.topology = topo;
  for (std::size_t e = 0; e < topo.edges.size(); ++e) graph.phi.push_back(rng.uniform(0.1, 2.0));

  RelationshipGraph scaled = graph;
  for (double& phi : scaled.phi) phi *= 41.5;

  for (const auto strategy : {FixedStrategy::min_weight, FixedStrategy::max_betweenness}) {
    CHECK(cluster_fixed(graph, 3, strategy).labels == cluster_fixed(scaled, 3, strategy).labels);
  }
  CHECK(cluster_adaptive(graph, 7).labels == cluster_adaptive(scaled, 7).labels);
}

TEST_CASE("dcs composition is deterministic and handles one station") {
  std::vector<BaseStation> one;
  BaseStation bs;
  bs.id = 0;
  bs.coverage_m = 100;
  bs.backhaul_mbps = 100;
  one.push_back(bs);
  NetworkGraph topo;
  topo.n = 1;
  DcsOptions options;
  options.adaptive = true;
  const auto single = dcs(one, {{1.0, 2.0}}, topo, {1, 1, 1, 1}, options);
  CHECK(single.num_clusters == 1);
}

TEST_CASE("dcs recovers spatially and traffic-separated groups") {
  // Two groups of four: co-located-ish, similar traffic within a group; far
  // apart and dissimilar across groups. Cross edges exist in the topology.
  std::vector<BaseStation> stations;
  std::vector<std::vector<double>> series;
  Rng rng(4);
  for (int i = 0; i < 8; ++i) {
    const bool group_b = i >= 4;
    BaseStation bs;
    bs.id = i;
    bs.series_ref = i;
    bs.x_m = (group_b ? 5000.0 : 0.0) + rng.uniform(0, 120);
    bs.y_m = rng.uniform(0, 120);
    bs.coverage_m = 150.0;
    bs.backhaul_mbps = 400.0;
    stations.push_back(bs);
    std::vector<double> s;
    for (int t = 0; t < 48; ++t) {
      s.push_back(group_b ? rng.uniform(8, 10) : rng.uniform(0, 2));
    }
    series.push_back(std::move(s));
  }
  NetworkGraph topo = generate_regular_topology(8, 4, 12);

  DcsOptions options;
  options.adaptive = false;
  options.fixed_count = 2;
  options.seed = 1;
  const auto got = dcs(stations, series, topo, {1, 1, 1, 1}, options);
  CHECK(got.num_clusters == 2);
  for (int i = 0; i < 4; ++i) {
    CHECK(got.labels[i] == got.labels[0]);
    CHECK(got.labels[i + 4] == got.labels[4]);
  }
  CHECK(got.labels[0] != got.labels[4]);

  const auto again = dcs(stations, series, topo, {1, 1, 1, 1}, options);
  CHECK(again.labels == got.labels);
}
