#include "cmcepi/cmc_graph.hpp"

#include <algorithm>
#include <limits>
#include <ostream>

#include "cmcepi/errors.hpp"
#include "cmcepi/rng.hpp"

namespace cmcepi {

namespace {

struct Slot {
  NodeId node;
  EdgeKind kind;
};

// Triangle sorts before single so that deduplication keeps the triangle label.
bool slot_less(const Slot& a, const Slot& b) {
  if (a.node != b.node) return a.node < b.node;
  return a.kind == EdgeKind::triangle && b.kind == EdgeKind::single;
}

void erase_uniform(std::vector<NodeId>& list, Engine& rng) {
  const auto i = uniform_below(rng, list.size());
  list[i] = list.back();
  list.pop_back();
}

std::uint64_t count_closing(std::span<const NodeId> a, std::span<const NodeId> b, NodeId floor) {
  auto ia = std::upper_bound(a.begin(), a.end(), floor);
  auto ib = std::upper_bound(b.begin(), b.end(), floor);
  std::uint64_t c = 0;
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++c;
      ++ia;
      ++ib;
    }
  }
  return c;
}

// Triangles {u < v < w} with u as the smallest vertex.
std::uint64_t triangles_at(const CmcGraph& g, NodeId u) {
  std::uint64_t c = 0;
  const auto nu = g.neighbors(u);
  for (NodeId v : nu) {
    if (v <= u) continue;
    c += count_closing(nu, g.neighbors(v), v);
  }
  return c;
}

}  // namespace

CmcGraph::CmcGraph(std::size_t n, std::vector<Edge> edges,
                   std::vector<std::array<NodeId, 3>> triangles)
    : offsets_(n + 1, 0), edges_(std::move(edges)), triangles_(std::move(triangles)) {
  auto by_endpoints = [](const Edge& a, const Edge& b) {
    return a.u != b.u ? a.u < b.u : a.v < b.v;
  };
  if (!std::is_sorted(edges_.begin(), edges_.end(), by_endpoints))
    std::sort(edges_.begin(), edges_.end(), by_endpoints);
  for (const auto& e : edges_) {
    if (e.u >= e.v || e.v >= n) throw ValidationError("edge list must have u < v < n");
    ++offsets_[e.u + 1];
    ++offsets_[e.v + 1];
  }
  for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] += offsets_[i];
  neighbors_.resize(offsets_[n]);
  kinds_.resize(offsets_[n]);
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  // Sorted edges fill each list in increasing neighbor order.
  for (const auto& e : edges_) {
    neighbors_[fill[e.u]] = e.v;
    kinds_[fill[e.u]++] = e.kind;
    neighbors_[fill[e.v]] = e.u;
    kinds_[fill[e.v]++] = e.kind;
  }
  for (std::size_t u = 0; u < n; ++u) {
    auto b = neighbors_.begin() + static_cast<std::ptrdiff_t>(offsets_[u]);
    auto e = neighbors_.begin() + static_cast<std::ptrdiff_t>(offsets_[u + 1]);
    if (std::adjacent_find(b, e, std::greater_equal<>()) != e)
      throw ValidationError("edge list has duplicate edges");
  }
}

std::optional<EdgeKind> CmcGraph::edge_kind(NodeId u, NodeId v) const {
  const auto nb = neighbors(u);
  const auto it = std::lower_bound(nb.begin(), nb.end(), v);
  if (it == nb.end() || *it != v) return std::nullopt;
  return neighbor_kinds(u)[static_cast<std::size_t>(it - nb.begin())];
}

DegreeSequence sample_degrees(const DegreeDistribution& dist, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ValidationError("graph size must be at least 1");
  const auto atoms = dist.atoms();
  std::vector<double> cdf;
  cdf.reserve(atoms.size());
  double acc = 0.0;
  for (const auto& a : atoms) cdf.push_back(acc += a.probability);
  Engine rng(seed);
  DegreeSequence out(n);
  for (auto& d : out) {
    const double u = uniform01(rng) * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    d = atoms[static_cast<std::size_t>(it - cdf.begin())].degree;
  }
  return out;
}

BuildResult build_graph(std::span<const JointDegree> seq, std::uint64_t seed) {
  const std::size_t n = seq.size();
  if (n >= std::numeric_limits<NodeId>::max()) throw ValidationError("graph too large");
  Engine rng(seed);
  GenerationReport report;

  std::vector<NodeId> singles, tri;
  std::size_t total_s = 0, total_t = 0;
  for (const auto& d : seq) {
    total_s += static_cast<std::size_t>(d.singles);
    total_t += static_cast<std::size_t>(d.triangles);
  }
  singles.reserve(total_s);
  tri.reserve(total_t);
  for (std::size_t i = 0; i < n; ++i) {
    singles.insert(singles.end(), static_cast<std::size_t>(seq[i].singles), static_cast<NodeId>(i));
    tri.insert(tri.end(), static_cast<std::size_t>(seq[i].triangles), static_cast<NodeId>(i));
  }
  if (singles.size() % 2 == 1) {
    erase_uniform(singles, rng);
    report.erased_single_halfedges = 1;
  }
  while (tri.size() % 3 != 0) {
    erase_uniform(tri, rng);
    ++report.erased_triangle_pairs;
  }
  shuffle(singles.begin(), singles.end(), rng);
  shuffle(tri.begin(), tri.end(), rng);

  // Raw multigraph as per-node slot lists.
  std::vector<std::size_t> offsets(n + 1, 0);
  auto count = [&](NodeId a, NodeId b) {
    if (a == b) {
      ++report.self_loops_removed;
      return;
    }
    ++offsets[a + 1];
    ++offsets[b + 1];
  };
  for (std::size_t i = 0; i < singles.size(); i += 2) count(singles[i], singles[i + 1]);
  std::vector<std::array<NodeId, 3>> triangles;
  triangles.reserve(tri.size() / 3);
  for (std::size_t i = 0; i < tri.size(); i += 3) {
    triangles.push_back({tri[i], tri[i + 1], tri[i + 2]});
    count(tri[i], tri[i + 1]);
    count(tri[i + 1], tri[i + 2]);
    count(tri[i], tri[i + 2]);
  }
  for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
  std::vector<Slot> slots(offsets[n]);
  std::vector<std::size_t> fill(offsets.begin(), offsets.end() - 1);
  auto place = [&](NodeId a, NodeId b, EdgeKind k) {
    if (a == b) return;
    slots[fill[a]++] = {b, k};
    slots[fill[b]++] = {a, k};
  };
  for (std::size_t i = 0; i < singles.size(); i += 2)
    place(singles[i], singles[i + 1], EdgeKind::single);
  for (const auto& t : triangles) {
    place(t[0], t[1], EdgeKind::triangle);
    place(t[1], t[2], EdgeKind::triangle);
    place(t[0], t[2], EdgeKind::triangle);
  }

  std::vector<Edge> edges;
  edges.reserve(slots.size() / 2);
  std::size_t raw_edges = slots.size() / 2;
  for (std::size_t u = 0; u < n; ++u) {
    auto b = slots.begin() + static_cast<std::ptrdiff_t>(offsets[u]);
    auto e = slots.begin() + static_cast<std::ptrdiff_t>(offsets[u + 1]);
    std::sort(b, e, slot_less);
    NodeId last = std::numeric_limits<NodeId>::max();
    for (auto it = b; it != e; ++it) {
      if (it->node == last) continue;
      last = it->node;
      if (it->node > u) edges.push_back({static_cast<NodeId>(u), it->node, it->kind});
    }
  }
  report.multi_edges_merged = raw_edges - edges.size();
  // Edges were emitted in (u, v) order already.
  return {CmcGraph(n, std::move(edges), std::move(triangles)), report};
}

ClusteringStats clustering_empirical_serial(const CmcGraph& g) {
  ClusteringStats s;
  std::uint64_t tri = 0;
  for (NodeId u = 0; u < g.node_count(); ++u) {
    const std::uint64_t d = g.degree(u);
    s.ordered_wedges += d * (d - (d > 0 ? 1 : 0));
    tri += triangles_at(g, u);
  }
  s.ordered_triangles = 6 * tri;
  if (s.ordered_wedges > 0)
    s.coefficient = static_cast<double>(s.ordered_triangles) / static_cast<double>(s.ordered_wedges);
  return s;
}

ClusteringStats clustering_empirical(const CmcGraph& g) {
  const auto n = static_cast<std::int64_t>(g.node_count());
  std::uint64_t wedges = 0;
  std::uint64_t tri = 0;
#pragma omp parallel for schedule(dynamic, 1024) reduction(+ : wedges, tri)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto u = static_cast<NodeId>(i);
    const std::uint64_t d = g.degree(u);
    wedges += d * (d - (d > 0 ? 1 : 0));
    tri += triangles_at(g, u);
  }
  ClusteringStats s;
  s.ordered_wedges = wedges;
  s.ordered_triangles = 6 * tri;
  if (wedges > 0) s.coefficient = static_cast<double>(s.ordered_triangles) / static_cast<double>(wedges);
  return s;
}

double clustering_asymptotic(const DegreeDistribution& dist) {
  const double e2d = dist.expect([](JointDegree d) { return 2.0 * d.triangles; });
  const double et = dist.expect([](JointDegree d) { return static_cast<double>(d.total_degree()); });
  const double et2 = dist.expect([](JointDegree d) {
    const double t = d.total_degree();
    return t * t;
  });
  const double denom = et2 - et;
  if (!(denom > 0.0)) throw DomainError("clustering limit undefined: no node has degree >= 2");
  return e2d / denom;
}

void write_edge_list(std::ostream& os, const CmcGraph& g) {
  for (const auto& e : g.edges())
    os << e.u << ' ' << e.v << ' ' << (e.kind == EdgeKind::single ? "single" : "triangle") << '\n';
}

}  // namespace cmcepi
