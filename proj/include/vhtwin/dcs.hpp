#pragma once

#include <cstdint>
#include <vector>

#include "vhtwin/topology.hpp"

namespace vhtwin {

/// Partition of station ids into contiguous cluster ids 0..C-1; clusters are
/// nonempty and numbered by smallest member id.
struct ClusterAssignment {
  std::vector<int> labels;  // labels[bs_id] = cluster id
  int num_clusters = 0;

  std::vector<std::vector<int>> members() const;
};

enum class LengthMode { inverse_phi, unit };
enum class FixedStrategy { min_weight, max_betweenness };

/// Shortest-path edge betweenness: for every unordered node pair, the fraction
/// of shortest paths crossing each edge, summed over pairs. Edge length is
/// 1/phi under inverse_phi, 1 otherwise. Disconnected pairs contribute zero.
/// Scores align with graph.topology.edges.
std::vector<double> edge_betweenness(const RelationshipGraph& graph, LengthMode mode);

/// Newman modularity Q of a partition; weighted mode uses phi as edge mass,
/// unweighted treats every edge as 1. Throws on a graph with zero edge mass.
double modularity(const RelationshipGraph& graph, const ClusterAssignment& assignment,
                  bool weighted);

/// Removes one edge at a time - the minimum-phi edge (min_weight) or the
/// maximum-betweenness edge with lengths 1/phi (max_betweenness), ties broken
/// by smallest (i,j) - until the graph has exactly target_clusters connected
/// components. Components become clusters.
ClusterAssignment cluster_fixed(const RelationshipGraph& graph, int target_clusters,
                                FixedStrategy strategy);

/// Louvain-style greedy modularity maximization on phi weights: seeded-shuffle
/// local moves, then community contraction, repeated until the gain drops
/// below 1e-9. When q_trace is given it receives the modularity after each
/// completed level (non-decreasing).
ClusterAssignment cluster_adaptive(const RelationshipGraph& graph, std::uint64_t seed,
                                   std::vector<double>* q_trace = nullptr);

struct DcsOptions {
  bool adaptive = false;
  int fixed_count = 5;
  FixedStrategy strategy = FixedStrategy::min_weight;
  int histogram_bins = 16;
  double g_floor_m = 1.0;
  bool normalize_g_term = true;
  std::uint64_t seed = 0;
};

/// Full segmentation pass: attributes -> relationship graph -> clustering.
ClusterAssignment dcs(const std::vector<BaseStation>& stations,
                      const std::vector<std::vector<double>>& series,
                      const NetworkGraph& topology, const AttributeWeights& weights,
                      const DcsOptions& options);

}  // namespace vhtwin
