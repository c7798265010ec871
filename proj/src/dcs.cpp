#include "vhtwin/dcs.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <queue>
#include <stdexcept>

#include "vhtwin/rng.hpp"

namespace vhtwin {

std::vector<std::vector<int>> ClusterAssignment::members() const {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(num_clusters));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out[static_cast<std::size_t>(labels[i])].push_back(static_cast<int>(i));
  }
  return out;
}

namespace {

// Relabels an arbitrary node->group map into contiguous cluster ids ordered by
// smallest member id.
ClusterAssignment canonicalize(const std::vector<int>& raw_labels) {
  std::map<int, int> first_seen;  // raw label -> new id, in smallest-member order
  for (const int raw : raw_labels) {
    if (!first_seen.count(raw)) {
      const int next_id = static_cast<int>(first_seen.size());
      first_seen.emplace(raw, next_id);
    }
  }
  // first_seen insertion above assigns ids in node order, which is already
  // smallest-member order because nodes are scanned ascending.
  ClusterAssignment assignment;
  assignment.labels.reserve(raw_labels.size());
  for (const int raw : raw_labels) assignment.labels.push_back(first_seen.at(raw));
  assignment.num_clusters = static_cast<int>(first_seen.size());
  return assignment;
}

struct EdgeRef {
  int to = 0;
  int edge_index = 0;
};

std::vector<std::vector<EdgeRef>> adjacency_with_edges(const NetworkGraph& g,
                                                       const std::vector<char>* alive) {
  std::vector<std::vector<EdgeRef>> adj(static_cast<std::size_t>(g.n));
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    if (alive != nullptr && !(*alive)[e]) continue;
    const auto& [i, j] = g.edges[e];
    adj[static_cast<std::size_t>(i)].push_back({j, static_cast<int>(e)});
    adj[static_cast<std::size_t>(j)].push_back({i, static_cast<int>(e)});
  }
  return adj;
}

// Connected components over the alive edge subset; raw component labels.
std::vector<int> component_labels(const NetworkGraph& g, const std::vector<char>* alive) {
  const auto adj = adjacency_with_edges(g, alive);
  std::vector<int> label(static_cast<std::size_t>(g.n), -1);
  for (int start = 0; start < g.n; ++start) {
    if (label[static_cast<std::size_t>(start)] != -1) continue;
    label[static_cast<std::size_t>(start)] = start;
    std::vector<int> stack{start};
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (const auto& ref : adj[static_cast<std::size_t>(u)]) {
        if (label[static_cast<std::size_t>(ref.to)] == -1) {
          label[static_cast<std::size_t>(ref.to)] = start;
          stack.push_back(ref.to);
        }
      }
    }
  }
  return label;
}

int count_distinct(const std::vector<int>& labels) {
  std::vector<int> sorted(labels);
  std::sort(sorted.begin(), sorted.end());
  return static_cast<int>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
}

// Brandes accumulation from every source; per-source passes are summed and
// halved at the end so each unordered pair counts once.
std::vector<double> betweenness_impl(const RelationshipGraph& graph, LengthMode mode,
                                     const std::vector<char>* alive) {
  const NetworkGraph& g = graph.topology;
  const auto adj = adjacency_with_edges(g, alive);
  std::vector<double> score(g.edges.size(), 0.0);

  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr double kTieRel = 1e-12;

  std::vector<double> dist(static_cast<std::size_t>(g.n));
  std::vector<double> sigma(static_cast<std::size_t>(g.n));
  std::vector<double> delta(static_cast<std::size_t>(g.n));
  std::vector<std::vector<EdgeRef>> preds(static_cast<std::size_t>(g.n));

  for (int source = 0; source < g.n; ++source) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    for (auto& p : preds) p.clear();

    dist[static_cast<std::size_t>(source)] = 0.0;
    sigma[static_cast<std::size_t>(source)] = 1.0;

    // Dijkstra with path counting; (distance, node) orders the settle
    // sequence deterministically.
    using QItem = std::pair<double, int>;
    std::priority_queue<QItem, std::vector<QItem>, std::greater<QItem>> queue;
    queue.push({0.0, source});
    std::vector<int> settle_order;
    std::vector<char> settled(static_cast<std::size_t>(g.n), 0);

    while (!queue.empty()) {
      const auto [du, u] = queue.top();
      queue.pop();
      if (settled[static_cast<std::size_t>(u)]) continue;
      settled[static_cast<std::size_t>(u)] = 1;
      settle_order.push_back(u);
      for (const auto& ref : adj[static_cast<std::size_t>(u)]) {
        const double len = mode == LengthMode::inverse_phi
                               ? 1.0 / graph.phi[static_cast<std::size_t>(ref.edge_index)]
                               : 1.0;
        if (settled[static_cast<std::size_t>(ref.to)]) continue;
        const double cand = du + len;
        const double dv = dist[static_cast<std::size_t>(ref.to)];
        const double tol = kTieRel * std::max(1.0, std::abs(cand));
        if (cand < dv - tol) {
          dist[static_cast<std::size_t>(ref.to)] = cand;
          sigma[static_cast<std::size_t>(ref.to)] = sigma[static_cast<std::size_t>(u)];
          preds[static_cast<std::size_t>(ref.to)].clear();
          preds[static_cast<std::size_t>(ref.to)].push_back({u, ref.edge_index});
          queue.push({cand, ref.to});
        } else if (std::abs(cand - dv) <= tol) {
          sigma[static_cast<std::size_t>(ref.to)] += sigma[static_cast<std::size_t>(u)];
          preds[static_cast<std::size_t>(ref.to)].push_back({u, ref.edge_index});
        }
      }
    }

    for (auto it = settle_order.rbegin(); it != settle_order.rend(); ++it) {
      const int w = *it;
      for (const auto& ref : preds[static_cast<std::size_t>(w)]) {
        const double share = sigma[static_cast<std::size_t>(ref.to)] /
                             sigma[static_cast<std::size_t>(w)] *
                             (1.0 + delta[static_cast<std::size_t>(w)]);
        score[static_cast<std::size_t>(ref.edge_index)] += share;
        delta[static_cast<std::size_t>(ref.to)] += share;
      }
    }
  }

  for (double& s : score) s *= 0.5;
  return score;
}

}  // namespace

std::vector<double> edge_betweenness(const RelationshipGraph& graph, LengthMode mode) {
  if (graph.topology.n == 0) {
    throw std::invalid_argument("edge_betweenness: empty graph");
  }
  if (mode == LengthMode::inverse_phi) {
    for (const double phi : graph.phi) {
      if (!(phi > 0.0)) throw std::invalid_argument("edge_betweenness: phi must be positive");
    }
  }
  return betweenness_impl(graph, mode, nullptr);
}

double modularity(const RelationshipGraph& graph, const ClusterAssignment& assignment,
                  bool weighted) {
  const NetworkGraph& g = graph.topology;
  if (static_cast<int>(assignment.labels.size()) != g.n) {
    throw std::invalid_argument("modularity: assignment must cover all nodes");
  }
  for (const int label : assignment.labels) {
    if (label < 0 || label >= assignment.num_clusters) {
      throw std::invalid_argument("modularity: cluster id out of range");
    }
  }

  double total = 0.0;
  std::vector<double> intra(static_cast<std::size_t>(assignment.num_clusters), 0.0);
  std::vector<double> degree_sum(static_cast<std::size_t>(assignment.num_clusters), 0.0);

  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto& [i, j] = g.edges[e];
    const double w = weighted ? graph.phi[e] : 1.0;
    total += w;
    const int ci = assignment.labels[static_cast<std::size_t>(i)];
    const int cj = assignment.labels[static_cast<std::size_t>(j)];
    if (ci == cj) intra[static_cast<std::size_t>(ci)] += w;
    degree_sum[static_cast<std::size_t>(ci)] += w;
    degree_sum[static_cast<std::size_t>(cj)] += w;
  }
  if (total <= 0.0) throw std::invalid_argument("modularity: graph has no edge mass");

  double q = 0.0;
  for (int c = 0; c < assignment.num_clusters; ++c) {
    const double frac_intra = intra[static_cast<std::size_t>(c)] / total;
    const double frac_degree = degree_sum[static_cast<std::size_t>(c)] / (2.0 * total);
    q += frac_intra - frac_degree * frac_degree;
  }
  return q;
}

ClusterAssignment cluster_fixed(const RelationshipGraph& graph, int target_clusters,
                                FixedStrategy strategy) {
  const NetworkGraph& g = graph.topology;
  if (target_clusters < 1 || target_clusters > g.n) {
    throw std::invalid_argument("cluster_fixed: need 1 <= C <= N");
  }

  std::vector<char> alive(g.edges.size(), 1);
  std::vector<int> labels = component_labels(g, &alive);
  int components = count_distinct(labels);
  if (components > target_clusters) {
    throw std::invalid_argument("cluster_fixed: graph already has more components than C");
  }

  while (components < target_clusters) {
    // Pick the edge to remove; edges are lexicographically sorted so the first
    // extremal hit is the smallest (i,j) tie-break.
    std::size_t pick = g.edges.size();
    if (strategy == FixedStrategy::min_weight) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t e = 0; e < g.edges.size(); ++e) {
        if (alive[e] && graph.phi[e] < best) {
          best = graph.phi[e];
          pick = e;
        }
      }
    } else {
      const auto scores = betweenness_impl(graph, LengthMode::inverse_phi, &alive);
      double best = -1.0;
      for (std::size_t e = 0; e < g.edges.size(); ++e) {
        if (alive[e] && scores[e] > best) {
          best = scores[e];
          pick = e;
        }
      }
    }
    alive[pick] = 0;
    labels = component_labels(g, &alive);
    components = count_distinct(labels);
  }

  return canonicalize(labels);
}

namespace {

// Working graph for Louvain levels; contraction introduces self-loops.
struct WeightedGraph {
  int n = 0;
  std::vector<std::vector<std::pair<int, double>>> adj;  // neighbor, weight
  std::vector<double> self_weight;
  double total_mass = 0.0;  // sum of edge weights + self weights

  std::vector<double> degrees() const {
    std::vector<double> deg(static_cast<std::size_t>(n), 0.0);
    for (int u = 0; u < n; ++u) {
      for (const auto& [v, w] : adj[static_cast<std::size_t>(u)]) {
        deg[static_cast<std::size_t>(u)] += w;
      }
      deg[static_cast<std::size_t>(u)] += 2.0 * self_weight[static_cast<std::size_t>(u)];
    }
    return deg;
  }
};

struct LevelResult {
  std::vector<int> community;  // node -> community id (contiguous)
  int num_communities = 0;
  bool any_move = false;
};

// One Louvain level: greedy local moves until no node improves.
LevelResult louvain_level(const WeightedGraph& g, Rng& rng) {
  std::vector<int> community(static_cast<std::size_t>(g.n));
  for (int i = 0; i < g.n; ++i) community[static_cast<std::size_t>(i)] = i;

  const auto degree = g.degrees();
  std::vector<double> community_degree = degree;  // singleton start
  const double two_m = 2.0 * g.total_mass;

  std::vector<int> order(static_cast<std::size_t>(g.n));
  for (int i = 0; i < g.n; ++i) order[static_cast<std::size_t>(i)] = i;

  bool any_move = false;
  bool moved = true;
  while (moved) {
    moved = false;
    rng.shuffle(order);
    for (const int node : order) {
      const int old_comm = community[static_cast<std::size_t>(node)];

      // Weights from node to each neighboring community.
      std::map<int, double> link;
      for (const auto& [v, w] : g.adj[static_cast<std::size_t>(node)]) {
        link[community[static_cast<std::size_t>(v)]] += w;
      }

      community_degree[static_cast<std::size_t>(old_comm)] -=
          degree[static_cast<std::size_t>(node)];

      const double k_node = degree[static_cast<std::size_t>(node)];
      auto gain = [&](int comm) {
        const auto it = link.find(comm);
        const double k_in = it == link.end() ? 0.0 : it->second;
        return k_in / g.total_mass -
               community_degree[static_cast<std::size_t>(comm)] * k_node / (two_m * two_m) * 2.0;
      };

      // Move only on strict improvement over staying put; improving ties go to
      // the smallest community id. Strictness guarantees termination.
      int best_comm = old_comm;
      double best_gain = gain(old_comm);
      for (const auto& entry : link) {
        const int comm = entry.first;
        if (comm == old_comm) continue;
        const double cand = gain(comm);
        if (cand > best_gain || (best_comm != old_comm && cand == best_gain && comm < best_comm)) {
          best_comm = comm;
          best_gain = cand;
        }
      }

      community[static_cast<std::size_t>(node)] = best_comm;
      community_degree[static_cast<std::size_t>(best_comm)] +=
          degree[static_cast<std::size_t>(node)];
      if (best_comm != old_comm) {
        moved = true;
        any_move = true;
      }
    }
  }

  // Compact community ids.
  std::map<int, int> remap;
  for (const int c : community) {
    if (!remap.count(c)) {
      const int next_id = static_cast<int>(remap.size());
      remap.emplace(c, next_id);
    }
  }
  LevelResult result;
  result.community.reserve(community.size());
  for (const int c : community) result.community.push_back(remap.at(c));
  result.num_communities = static_cast<int>(remap.size());
  result.any_move = any_move;
  return result;
}

WeightedGraph contract(const WeightedGraph& g, const LevelResult& level) {
  WeightedGraph out;
  out.n = level.num_communities;
  out.adj.resize(static_cast<std::size_t>(out.n));
  out.self_weight.assign(static_cast<std::size_t>(out.n), 0.0);
  out.total_mass = g.total_mass;

  std::map<std::pair<int, int>, double> merged;
  for (int u = 0; u < g.n; ++u) {
    const int cu = level.community[static_cast<std::size_t>(u)];
    out.self_weight[static_cast<std::size_t>(cu)] += g.self_weight[static_cast<std::size_t>(u)];
    for (const auto& [v, w] : g.adj[static_cast<std::size_t>(u)]) {
      if (v < u) continue;  // each undirected edge once
      const int cv = level.community[static_cast<std::size_t>(v)];
      if (cu == cv) {
        out.self_weight[static_cast<std::size_t>(cu)] += w;
      } else {
        merged[{std::min(cu, cv), std::max(cu, cv)}] += w;
      }
    }
  }
  for (const auto& [edge, w] : merged) {
    out.adj[static_cast<std::size_t>(edge.first)].push_back({edge.second, w});
    out.adj[static_cast<std::size_t>(edge.second)].push_back({edge.first, w});
  }
  return out;
}

// Modularity of a community map over the working graph.
double weighted_modularity(const WeightedGraph& g, const std::vector<int>& community,
                           int num_communities) {
  std::vector<double> intra(static_cast<std::size_t>(num_communities), 0.0);
  std::vector<double> comm_degree(static_cast<std::size_t>(num_communities), 0.0);
  const auto degree = g.degrees();

  for (int u = 0; u < g.n; ++u) {
    const int cu = community[static_cast<std::size_t>(u)];
    comm_degree[static_cast<std::size_t>(cu)] += degree[static_cast<std::size_t>(u)];
    intra[static_cast<std::size_t>(cu)] += g.self_weight[static_cast<std::size_t>(u)];
    for (const auto& [v, w] : g.adj[static_cast<std::size_t>(u)]) {
      if (v < u) continue;
      if (community[static_cast<std::size_t>(v)] == cu) {
        intra[static_cast<std::size_t>(cu)] += w;
      }
    }
  }
  double q = 0.0;
  for (int c = 0; c < num_communities; ++c) {
    q += intra[static_cast<std::size_t>(c)] / g.total_mass -
         (comm_degree[static_cast<std::size_t>(c)] / (2.0 * g.total_mass)) *
             (comm_degree[static_cast<std::size_t>(c)] / (2.0 * g.total_mass));
  }
  return q;
}

}  // namespace

ClusterAssignment cluster_adaptive(const RelationshipGraph& graph, std::uint64_t seed,
                                   std::vector<double>* q_trace) {
  const NetworkGraph& g = graph.topology;
  if (g.n == 0) throw std::invalid_argument("cluster_adaptive: empty graph");

  WeightedGraph work;
  work.n = g.n;
  work.adj.resize(static_cast<std::size_t>(g.n));
  work.self_weight.assign(static_cast<std::size_t>(g.n), 0.0);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto& [i, j] = g.edges[e];
    work.adj[static_cast<std::size_t>(i)].push_back({j, graph.phi[e]});
    work.adj[static_cast<std::size_t>(j)].push_back({i, graph.phi[e]});
    work.total_mass += graph.phi[e];
  }
  if (work.total_mass <= 0.0) {
    // No edges: every node is its own cluster.
    std::vector<int> singleton(static_cast<std::size_t>(g.n));
    for (int i = 0; i < g.n; ++i) singleton[static_cast<std::size_t>(i)] = i;
    return canonicalize(singleton);
  }

  Rng rng(mix_seed(seed, 0x4c6f7576ULL));
  std::vector<int> flat(static_cast<std::size_t>(g.n));
  for (int i = 0; i < g.n; ++i) flat[static_cast<std::size_t>(i)] = i;

  constexpr double kMinGain = 1e-9;
  double prev_q = weighted_modularity(work, flat, g.n);
  if (q_trace != nullptr) q_trace->push_back(prev_q);

  while (true) {
    const LevelResult level = louvain_level(work, rng);

    // Fold this level into the flat node -> community map.
    std::vector<int> next_flat(flat.size());
    for (std::size_t i = 0; i < flat.size(); ++i) {
      next_flat[i] = level.community[static_cast<std::size_t>(flat[i])];
    }
    const double q = weighted_modularity(work, level.community, level.num_communities);

    if (!level.any_move || q - prev_q < kMinGain) {
      if (level.any_move && q > prev_q) {
        flat = next_flat;
        if (q_trace != nullptr) q_trace->push_back(q);
      }
      break;
    }
    flat = next_flat;
    prev_q = q;
    if (q_trace != nullptr) q_trace->push_back(q);
    work = contract(work, level);
  }

  return canonicalize(flat);
}

ClusterAssignment dcs(const std::vector<BaseStation>& stations,
                      const std::vector<std::vector<double>>& series,
                      const NetworkGraph& topology, const AttributeWeights& weights,
                      const DcsOptions& options) {
  const auto attrs = compute_attributes(stations, series, options.histogram_bins);
  const auto graph = build_relationship_graph(topology, attrs, weights, options.g_floor_m,
                                              options.normalize_g_term);
  if (options.adaptive) {
    return cluster_adaptive(graph, options.seed);
  }
  return cluster_fixed(graph, options.fixed_count, options.strategy);
}

}  // namespace vhtwin
