#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "cmcepi/degree_model.hpp"

namespace cmcepi {

using NodeId = std::uint32_t;
using DegreeSequence = std::vector<JointDegree>;

struct Edge {
  NodeId u;  // u < v
  NodeId v;
  EdgeKind kind;
};

/// Simple undirected graph in CSR form. Neighbor lists are sorted and carry
/// the kind of the connecting edge.
class CmcGraph {
 public:
  CmcGraph() = default;
  /// Edges must be simple: u < v < n and no duplicates.
  CmcGraph(std::size_t n, std::vector<Edge> edges, std::vector<std::array<NodeId, 3>> triangles);

  std::size_t node_count() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t edge_count() const { return edges_.size(); }
  std::span<const Edge> edges() const { return edges_; }

  std::span<const NodeId> neighbors(NodeId u) const {
    return {neighbors_.data() + offsets_[u], neighbors_.data() + offsets_[u + 1]};
  }
  std::span<const EdgeKind> neighbor_kinds(NodeId u) const {
    return {kinds_.data() + offsets_[u], kinds_.data() + offsets_[u + 1]};
  }
  std::size_t degree(NodeId u) const { return offsets_[u + 1] - offsets_[u]; }
  std::optional<EdgeKind> edge_kind(NodeId u, NodeId v) const;

  /// Node triples exactly as grouped by the matching, before erasure.
  std::span<const std::array<NodeId, 3>> built_triangles() const { return triangles_; }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> neighbors_;
  std::vector<EdgeKind> kinds_;
  std::vector<Edge> edges_;
  std::vector<std::array<NodeId, 3>> triangles_;
};

struct GenerationReport {
  int erased_single_halfedges = 0;  // 0 or 1
  int erased_triangle_pairs = 0;    // 0, 1 or 2
  std::size_t self_loops_removed = 0;
  std::size_t multi_edges_merged = 0;
};

struct ClusteringStats {
  std::uint64_t ordered_wedges = 0;
  std::uint64_t ordered_triangles = 0;
  std::optional<double> coefficient;
};

/// n i.i.d. joint degrees by inverse-CDF sampling.
DegreeSequence sample_degrees(const DegreeDistribution& dist, std::size_t n, std::uint64_t seed);

struct BuildResult {
  CmcGraph graph;
  GenerationReport report;
};

/// Shuffles the single half-edge list and pairs it consecutively, shuffles the
/// triangle list and groups it in threes, after erasing a uniformly chosen
/// half-edge (pair) to fix parity. Self-loops are dropped and multi-edges
/// merged; a merged edge is labeled triangle if any copy was.
BuildResult build_graph(std::span<const JointDegree> seq, std::uint64_t seed);

/// Wedges sum d(d-1); triangles by sorted-adjacency intersection. Uses
/// OpenMP when available.
ClusteringStats clustering_empirical(const CmcGraph& g);
/// Single-threaded reference for clustering_empirical.
ClusteringStats clustering_empirical_serial(const CmcGraph& g);

/// Limit E(2D) / (E((2D+S)^2) - E(2D+S)); DomainError when the denominator is 0.
double clustering_asymptotic(const DegreeDistribution& dist);

/// One "u v kind" line per edge, kind is "single" or "triangle".
void write_edge_list(std::ostream& os, const CmcGraph& g);

}  // namespace cmcepi
