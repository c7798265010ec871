#include "vhtwin/topology.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include "vhtwin/errors.hpp"
#include "vhtwin/rng.hpp"

namespace vhtwin {

std::vector<int> NetworkGraph::degrees() const {
  std::vector<int> deg(static_cast<std::size_t>(n), 0);
  for (const auto& [i, j] : edges) {
    ++deg[static_cast<std::size_t>(i)];
    ++deg[static_cast<std::size_t>(j)];
  }
  return deg;
}

std::vector<std::vector<int>> NetworkGraph::adjacency() const {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (const auto& [i, j] : edges) {
    adj[static_cast<std::size_t>(i)].push_back(j);
    adj[static_cast<std::size_t>(j)].push_back(i);
  }
  return adj;
}

bool NetworkGraph::connected() const {
  if (n == 0) return true;
  const auto adj = adjacency();
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int reached = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (const int v : adj[static_cast<std::size_t>(u)]) {
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        ++reached;
        stack.push_back(v);
      }
    }
  }
  return reached == n;
}

namespace {

std::pair<int, int> ordered_edge(int a, int b) {
  return a < b ? std::pair<int, int>{a, b} : std::pair<int, int>{b, a};
}

// Circulant d-regular base: offsets 1..d/2, plus the diameter matching when d
// is odd (n is even then, since n*d must be even).
std::set<std::pair<int, int>> circulant_edges(int n, int degree) {
  std::set<std::pair<int, int>> edges;
  for (int off = 1; off <= degree / 2; ++off) {
    for (int i = 0; i < n; ++i) {
      edges.insert(ordered_edge(i, (i + off) % n));
    }
  }
  if (degree % 2 == 1) {
    for (int i = 0; i < n / 2; ++i) {
      edges.insert(ordered_edge(i, i + n / 2));
    }
  }
  return edges;
}

}  // namespace

NetworkGraph generate_regular_topology(int n, int degree, std::uint64_t seed) {
  if (n <= degree || degree < 1) {
    throw std::invalid_argument("regular topology infeasible: need n > degree >= 1, got n=" +
                                std::to_string(n) + " degree=" + std::to_string(degree));
  }
  if ((static_cast<long long>(n) * degree) % 2 != 0) {
    throw std::invalid_argument("regular topology infeasible: n*degree must be even");
  }

  for (std::uint64_t attempt = 0;; ++attempt) {
    auto edge_set = circulant_edges(n, degree);
    std::vector<std::pair<int, int>> edges(edge_set.begin(), edge_set.end());
    Rng rng(mix_seed(seed, attempt));

    // Degree-preserving double-edge swaps randomize the circulant skeleton.
    const std::size_t swaps = static_cast<std::size_t>(8) * edges.size();
    for (std::size_t s = 0; s < swaps; ++s) {
      const std::size_t ia = rng.bounded(edges.size());
      const std::size_t ib = rng.bounded(edges.size());
      if (ia == ib) continue;
      auto [a, b] = edges[ia];
      auto [c, d] = edges[ib];
      if (rng.bounded(2) == 1) std::swap(c, d);
      // Proposed rewiring: (a,d) and (c,b).
      if (a == d || c == b) continue;
      const auto e1 = ordered_edge(a, d);
      const auto e2 = ordered_edge(c, b);
      if (e1 == e2) continue;
      if (edge_set.count(e1) || edge_set.count(e2)) continue;
      edge_set.erase(edges[ia]);
      edge_set.erase(edges[ib]);
      edge_set.insert(e1);
      edge_set.insert(e2);
      edges[ia] = e1;
      edges[ib] = e2;
    }

    NetworkGraph graph;
    graph.n = n;
    graph.edges.assign(edge_set.begin(), edge_set.end());
    if (graph.connected()) return graph;
  }
}

double coverage_overlap(const BaseStation& a, const BaseStation& b) {
  const double r1 = a.coverage_m;
  const double r2 = b.coverage_m;
  if (r1 <= 0.0 || r2 <= 0.0) {
    throw std::invalid_argument("coverage_overlap requires positive radii");
  }
  const double dx = a.x_m - b.x_m;
  const double dy = a.y_m - b.y_m;
  const double d = std::sqrt(dx * dx + dy * dy);
  const double area1 = std::numbers::pi * r1 * r1;
  const double area2 = std::numbers::pi * r2 * r2;

  double inter = 0.0;
  if (d >= r1 + r2) {
    inter = 0.0;
  } else if (d <= std::abs(r1 - r2)) {
    inter = std::min(area1, area2);
  } else {
    const double alpha = std::acos((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1));
    const double gamma = std::acos((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2));
    const double kite = 0.5 * std::sqrt(std::max(0.0, (-d + r1 + r2) * (d + r1 - r2) *
                                                          (d - r1 + r2) * (d + r1 + r2)));
    inter = r1 * r1 * alpha + r2 * r2 * gamma - kite;
  }
  const double uni = area1 + area2 - inter;
  return inter / uni;
}

double traffic_similarity(const std::vector<double>& s1, const std::vector<double>& s2,
                          int bins) {
  if (s1.empty() || s2.empty()) {
    throw std::invalid_argument("traffic_similarity requires nonempty series");
  }
  if (bins < 2) {
    throw std::invalid_argument("traffic_similarity requires bins >= 2");
  }

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  auto scan = [&](const std::vector<double>& s) {
    int present = 0;
    for (const double v : s) {
      if (std::isnan(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      ++present;
    }
    return present;
  };
  if (scan(s1) == 0 || scan(s2) == 0) {
    throw std::invalid_argument("traffic_similarity requires nonempty series");
  }
  if (hi <= lo) return 1.0;  // both series constant at the same value

  const double width = (hi - lo) / bins;
  auto histogram = [&](const std::vector<double>& s) {
    std::vector<double> h(static_cast<std::size_t>(bins), 0.0);
    for (const double v : s) {
      if (std::isnan(v)) continue;
      int idx = static_cast<int>((v - lo) / width);
      idx = std::clamp(idx, 0, bins - 1);
      h[static_cast<std::size_t>(idx)] += 1.0;
    }
    return h;
  };
  const auto h1 = histogram(s1);
  const auto h2 = histogram(s2);

  double dot = 0.0, n1 = 0.0, n2 = 0.0;
  for (int i = 0; i < bins; ++i) {
    dot += h1[static_cast<std::size_t>(i)] * h2[static_cast<std::size_t>(i)];
    n1 += h1[static_cast<std::size_t>(i)] * h1[static_cast<std::size_t>(i)];
    n2 += h2[static_cast<std::size_t>(i)] * h2[static_cast<std::size_t>(i)];
  }
  return dot / (std::sqrt(n1) * std::sqrt(n2));
}

double backhaul_similarity(const BaseStation& a, const BaseStation& b) {
  if (a.backhaul_mbps <= 0.0 || b.backhaul_mbps <= 0.0) {
    throw std::invalid_argument("backhaul_similarity requires positive capacities");
  }
  return std::min(a.backhaul_mbps, b.backhaul_mbps) /
         std::max(a.backhaul_mbps, b.backhaul_mbps);
}

AttributeMatrices compute_attributes(const std::vector<BaseStation>& stations,
                                     const std::vector<std::vector<double>>& series,
                                     int bins) {
  const int n = static_cast<int>(stations.size());
  if (series.size() != stations.size()) {
    throw std::invalid_argument("compute_attributes: one series per station required");
  }

  AttributeMatrices m;
  m.g = SquareMatrix(n, 0.0);
  m.k = SquareMatrix(n, 1.0);
  m.beta = SquareMatrix(n, 1.0);
  m.tau = SquareMatrix(n, 1.0);

  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const auto& a = stations[static_cast<std::size_t>(i)];
      const auto& b = stations[static_cast<std::size_t>(j)];
      const double dx = a.x_m - b.x_m;
      const double dy = a.y_m - b.y_m;
      const double g = std::sqrt(dx * dx + dy * dy);
      const double k = backhaul_similarity(a, b);
      const double beta = coverage_overlap(a, b);
      const double tau = traffic_similarity(series[static_cast<std::size_t>(i)],
                                            series[static_cast<std::size_t>(j)], bins);
      m.g.at(i, j) = m.g.at(j, i) = g;
      m.k.at(i, j) = m.k.at(j, i) = k;
      m.beta.at(i, j) = m.beta.at(j, i) = beta;
      m.tau.at(i, j) = m.tau.at(j, i) = tau;
    }
  }
  return m;
}

RelationshipGraph build_relationship_graph(const NetworkGraph& topology,
                                           const AttributeMatrices& attrs,
                                           const AttributeWeights& weights, double g_floor,
                                           bool normalize_g_term) {
  if (topology.n != attrs.size()) {
    throw std::invalid_argument("build_relationship_graph: topology/attribute dimension mismatch");
  }
  if (g_floor <= 0.0) {
    throw std::invalid_argument("build_relationship_graph: g_floor must be > 0");
  }
  if (weights.g < 0 || weights.k < 0 || weights.beta < 0 || weights.tau < 0 ||
      weights.g + weights.k + weights.beta + weights.tau <= 0.0) {
    throw std::invalid_argument("build_relationship_graph: weights must be nonnegative, one positive");
  }

  std::vector<double> g_term(topology.edges.size(), 0.0);
  double g_term_max = 0.0;
  for (std::size_t e = 0; e < topology.edges.size(); ++e) {
    const auto& [i, j] = topology.edges[e];
    g_term[e] = 1.0 / std::max(attrs.g.at(i, j), g_floor);
    g_term_max = std::max(g_term_max, g_term[e]);
  }
  if (normalize_g_term && g_term_max > 0.0) {
    for (double& t : g_term) t /= g_term_max;  // lands in (0,1], closest pair at 1
  }

  RelationshipGraph graph;
  graph.topology = topology;
  graph.phi.resize(topology.edges.size());
  for (std::size_t e = 0; e < topology.edges.size(); ++e) {
    const auto& [i, j] = topology.edges[e];
    graph.phi[e] = weights.g * g_term[e] + weights.k * attrs.k.at(i, j) +
                   weights.beta * attrs.beta.at(i, j) + weights.tau * attrs.tau.at(i, j);
  }
  return graph;
}

std::vector<BaseStation> load_roster_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open roster file: " + path);

  std::string line;
  if (!std::getline(in, line) || line.rfind("id,x_m,y_m,coverage_m,backhaul_mbps", 0) != 0) {
    throw DataError("roster file missing expected header: " + path);
  }

  std::vector<BaseStation> stations;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    BaseStation bs;
    char extra = 0;
    const int got = std::sscanf(line.c_str(), "%d,%lf,%lf,%lf,%lf%c", &bs.id, &bs.x_m, &bs.y_m,
                                &bs.coverage_m, &bs.backhaul_mbps, &extra);
    if (got != 5 && !(got == 6 && (extra == '\r'))) {
      throw DataError("unparsable roster row at line " + std::to_string(line_no) + " in " + path);
    }
    if (bs.coverage_m <= 0 || bs.backhaul_mbps <= 0) {
      throw DataError("roster row at line " + std::to_string(line_no) +
                      " violates positivity of coverage/backhaul");
    }
    bs.series_ref = bs.id;
    stations.push_back(bs);
  }
  if (stations.empty()) throw DataError("roster file has no stations: " + path);

  std::sort(stations.begin(), stations.end(),
            [](const BaseStation& a, const BaseStation& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < stations.size(); ++i) {
    if (stations[i].id != static_cast<int>(i)) {
      throw DataError("roster ids must be unique and contiguous 0..N-1");
    }
  }
  return stations;
}

void save_roster_csv(const std::string& path, const std::vector<BaseStation>& stations) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write roster file: " + path);
  out << "id,x_m,y_m,coverage_m,backhaul_mbps\n";
  char buf[160];
  for (const auto& bs : stations) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g\n", bs.id, bs.x_m, bs.y_m,
                  bs.coverage_m, bs.backhaul_mbps);
    out << buf;
  }
}

std::vector<BaseStation> generate_roster(int n_bs, std::uint64_t seed) {
  if (n_bs < 1) throw std::invalid_argument("generate_roster: n_bs must be >= 1");
  const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_bs))));
  constexpr double kPitchM = 235.0;  // urban grid cell pitch

  std::vector<BaseStation> stations;
  stations.reserve(static_cast<std::size_t>(n_bs));
  for (int i = 0; i < n_bs; ++i) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
    BaseStation bs;
    bs.id = i;
    bs.series_ref = i;
    bs.x_m = (i % side) * kPitchM + rng.uniform(-40.0, 40.0);
    bs.y_m = (i / side) * kPitchM + rng.uniform(-40.0, 40.0);
    bs.coverage_m = rng.uniform(150.0, 300.0);
    bs.backhaul_mbps = rng.uniform(200.0, 1000.0);
    stations.push_back(bs);
  }
  return stations;
}

}  // namespace vhtwin
