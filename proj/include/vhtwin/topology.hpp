#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace vhtwin {

/// A physical base station. Ids are contiguous 0..N-1 within a roster.
struct BaseStation {
  int id = 0;
  double x_m = 0.0;
  double y_m = 0.0;
  double coverage_m = 0.0;     // > 0
  double backhaul_mbps = 0.0;  // > 0
  int series_ref = 0;          // id of the traffic series owned by this BS
};

/// Dense square matrix, row-major. Attribute matrices are symmetric by
/// construction; symmetry is the producer's responsibility.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(int n, double fill = 0.0)
      : n_(n), cells_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), fill) {}

  int size() const { return n_; }
  double& at(int i, int j) { return cells_[static_cast<std::size_t>(i) * n_ + j]; }
  double at(int i, int j) const { return cells_[static_cast<std::size_t>(i) * n_ + j]; }

 private:
  int n_ = 0;
  std::vector<double> cells_;
};

/// Pairwise station attributes: geographic distance g (meters), backhaul
/// similarity k in (0,1], coverage overlap beta in [0,1], and traffic
/// distribution similarity tau in [0,1]. Diagonals: g=0, k=beta=tau=1.
struct AttributeMatrices {
  SquareMatrix g;
  SquareMatrix k;
  SquareMatrix beta;
  SquareMatrix tau;
  int size() const { return g.size(); }
};

/// Per-attribute weights for the relationship metric; at least one must be
/// positive.
struct AttributeWeights {
  double g = 1.0;
  double k = 1.0;
  double beta = 1.0;
  double tau = 1.0;
};

/// Undirected simple graph over station ids. Edges are stored normalized
/// (i < j) and lexicographically sorted.
struct NetworkGraph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;

  std::vector<int> degrees() const;
  std::vector<std::vector<int>> adjacency() const;
  bool connected() const;
};

/// Topology plus a positive relationship weight per edge, aligned with
/// topology.edges.
struct RelationshipGraph {
  NetworkGraph topology;
  std::vector<double> phi;
};

/// Builds a connected d-regular graph on n nodes, deterministic per seed.
/// Starts from a circulant construction, randomizes with degree-preserving
/// double-edge swaps, and retries with an incremented sub-seed until the
/// result is connected. Throws std::invalid_argument when n <= degree or
/// n*degree is odd.
NetworkGraph generate_regular_topology(int n, int degree, std::uint64_t seed);

/// Jaccard overlap of the two coverage disks: intersection / union area.
double coverage_overlap(const BaseStation& a, const BaseStation& b);

/// Cosine similarity of the two value histograms over `bins` equal-width bins
/// spanning the joint min/max of both series. Constant-and-equal series
/// compare as 1. Gap markers (NaN) are skipped.
double traffic_similarity(const std::vector<double>& s1, const std::vector<double>& s2,
                          int bins);

/// min(cap_a, cap_b) / max(cap_a, cap_b).
double backhaul_similarity(const BaseStation& a, const BaseStation& b);

/// Fills all four attribute matrices; series are indexed by station position.
AttributeMatrices compute_attributes(const std::vector<BaseStation>& stations,
                                     const std::vector<std::vector<double>>& series,
                                     int bins);

/// Evaluates Phi = w_g/max(g, g_floor) + w_k*k + w_beta*beta + w_tau*tau on
/// every topology edge. With normalize_g_term the distance term is rescaled by
/// its maximum over all edges so it lands in (0,1] and equal weights balance
/// the four terms.
RelationshipGraph build_relationship_graph(const NetworkGraph& topology,
                                           const AttributeMatrices& attrs,
                                           const AttributeWeights& weights, double g_floor,
                                           bool normalize_g_term = false);

/// Station roster file: CSV `id,x_m,y_m,coverage_m,backhaul_mbps`.
std::vector<BaseStation> load_roster_csv(const std::string& path);
void save_roster_csv(const std::string& path, const std::vector<BaseStation>& stations);

/// Synthesizes a roster on a jittered square grid (235 m pitch), deterministic
/// per seed.
std::vector<BaseStation> generate_roster(int n_bs, std::uint64_t seed);

}  // namespace vhtwin
