#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <sstream>

#include "cmcepi/cmc_graph.hpp"
#include "cmcepi/errors.hpp"

using namespace cmcepi;

namespace {

std::uint64_t brute_triangles(const CmcGraph& g) {
  const auto n = g.node_count();
  std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
  for (const auto& e : g.edges()) adj[e.u][e.v] = adj[e.v][e.u] = 1;
  std::uint64_t t = 0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t c = 0; c < n; ++c)
        if (a != b && b != c && a != c && adj[a][b] && adj[b][c] && adj[a][c]) ++t;
  return t;
}

}  // namespace

TEST_CASE("graph construction validates edges") {
  CHECK_THROWS_AS(CmcGraph(3, {{1, 1, EdgeKind::single}}, {}), ValidationError);
  CHECK_THROWS_AS(CmcGraph(3, {{2, 1, EdgeKind::single}}, {}), ValidationError);
  CHECK_THROWS_AS(CmcGraph(3, {{0, 3, EdgeKind::single}}, {}), ValidationError);
  CHECK_THROWS_AS(CmcGraph(3, {{0, 1, EdgeKind::single}, {0, 1, EdgeKind::triangle}}, {}),
                  ValidationError);
  CmcGraph g(4, {{1, 3, EdgeKind::triangle}, {0, 1, EdgeKind::single}}, {});
  CHECK(g.edge_count() == 2);
  CHECK(g.degree(1) == 2);
  CHECK(g.edge_kind(3, 1) == EdgeKind::triangle);
  CHECK(g.edge_kind(1, 0) == EdgeKind::single);
  CHECK_FALSE(g.edge_kind(0, 3));
  CHECK(g.neighbors(1)[0] == 0);
  CHECK(g.neighbors(1)[1] == 3);
}

TEST_CASE("sample_degrees") {
  CHECK_THROWS_AS(sample_degrees(DegreeDistribution::degenerate({0, 1}), 0, 1), ValidationError);
  auto seq = sample_degrees(DegreeDistribution::degenerate({0, 1}), 3, 1);
  CHECK(seq == DegreeSequence(3, JointDegree{0, 1}));
  seq = sample_degrees(DegreeDistribution::degenerate({2, 1}), 5, 9);
  CHECK(seq == DegreeSequence(5, JointDegree{2, 1}));

  const DegreeDistribution d2({{{4, 0}, 0.95}, {{2, 1}, 0.05}});
  seq = sample_degrees(d2, 100000, 5);
  std::size_t hits = 0;
  for (auto k : seq) hits += k == JointDegree{2, 1};
  CHECK(std::abs(hits / 1e5 - 0.05) <= 0.005);
  CHECK(sample_degrees(d2, 1000, 11) == sample_degrees(d2, 1000, 11));
}

TEST_CASE("small graphs") {
  DegreeSequence tri(3, JointDegree{0, 1});
  auto r = build_graph(tri, 3);
  CHECK(r.graph.edge_count() == 3);
  for (const auto& e : r.graph.edges()) CHECK(e.kind == EdgeKind::triangle);
  CHECK(r.report.erased_single_halfedges == 0);
  CHECK(r.report.erased_triangle_pairs == 0);
  CHECK(r.report.self_loops_removed == 0);
  CHECK(r.report.multi_edges_merged == 0);

  r = build_graph(DegreeSequence(3, JointDegree{1, 0}), 4);
  CHECK(r.graph.edge_count() == 1);
  CHECK(r.report.erased_single_halfedges == 1);
  std::size_t isolated = 0;
  for (NodeId v = 0; v < 3; ++v) isolated += r.graph.degree(v) == 0;
  CHECK(isolated == 1);

  r = build_graph(DegreeSequence(2, JointDegree{1, 0}), 5);
  REQUIRE(r.graph.edge_count() == 1);
  CHECK(r.graph.edges()[0].u == 0);
  CHECK(r.graph.edges()[0].v == 1);
  CHECK(r.graph.edges()[0].kind == EdgeKind::single);

  r = build_graph(DegreeSequence(4, JointDegree{0, 1}), 6);
  CHECK(r.report.erased_triangle_pairs == 1);
  CHECK(r.graph.edge_count() == 3);
  r = build_graph(DegreeSequence(5, JointDegree{0, 1}), 6);
  CHECK(r.report.erased_triangle_pairs == 2);
}

TEST_CASE("generated graphs are simple and respect the degree sequence") {
  const DegreeDistribution d({{{0, 1}, 0.3}, {{3, 2}, 0.3}, {{1, 0}, 0.2}, {{2, 3}, 0.2}});
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto seq = sample_degrees(d, 300, seed);
    const auto r = build_graph(seq, seed + 100);
    const auto& g = r.graph;
    std::set<std::pair<NodeId, NodeId>> seen;
    for (const auto& e : g.edges()) {
      CHECK(e.u < e.v);
      CHECK(seen.insert({e.u, e.v}).second);
    }
    std::size_t stubs = 0;
    for (NodeId v = 0; v < g.node_count(); ++v) {
      CHECK(g.degree(v) <= static_cast<std::size_t>(seq[v].total_degree()));
      stubs += seq[v].total_degree();
    }
    // every removed stub pair is accounted for by erasure, loops or merges
    const std::size_t single_stubs = [&] {
      std::size_t s = 0;
      for (auto k : seq) s += k.singles;
      return s;
    }();
    const std::size_t pairs = (stubs - single_stubs) / 2;
    const std::size_t raw_edges = (single_stubs - r.report.erased_single_halfedges) / 2 +
                                  3 * ((pairs - r.report.erased_triangle_pairs) / 3);
    CHECK(raw_edges == g.edge_count() + r.report.self_loops_removed + r.report.multi_edges_merged);
    for (const auto& t : g.built_triangles()) {
      if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) continue;
      CHECK(g.edge_kind(t[0], t[1]) == EdgeKind::triangle);
      CHECK(g.edge_kind(t[1], t[2]) == EdgeKind::triangle);
      CHECK(g.edge_kind(t[0], t[2]) == EdgeKind::triangle);
    }
    const auto again = build_graph(seq, seed + 100);
    REQUIRE(again.graph.edge_count() == g.edge_count());
    for (std::size_t i = 0; i < g.edge_count(); ++i) {
      CHECK(again.graph.edges()[i].u == g.edges()[i].u);
      CHECK(again.graph.edges()[i].v == g.edges()[i].v);
    }
  }
}

TEST_CASE("clustering on fixed graphs") {
  CmcGraph tri(3, {{0, 1, EdgeKind::triangle}, {0, 2, EdgeKind::triangle}, {1, 2, EdgeKind::triangle}}, {});
  auto c = clustering_empirical(tri);
  CHECK(c.ordered_wedges == 6);
  CHECK(c.ordered_triangles == 6);
  CHECK(*c.coefficient == 1.0);

  c = clustering_empirical(CmcGraph(2, {{0, 1, EdgeKind::single}}, {}));
  CHECK(c.ordered_wedges == 0);
  CHECK_FALSE(c.coefficient);

  c = clustering_empirical(CmcGraph(3, {{0, 1, EdgeKind::single}, {1, 2, EdgeKind::single}}, {}));
  CHECK(c.ordered_wedges == 2);
  CHECK(c.ordered_triangles == 0);
  CHECK(*c.coefficient == 0.0);
}

TEST_CASE("clustering matches brute force and the serial reference") {
  const DegreeDistribution d({{{1, 1}, 0.5}, {{2, 2}, 0.3}, {{4, 0}, 0.2}});
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto g = build_graph(sample_degrees(d, 150, seed), seed).graph;
    const auto par = clustering_empirical(g);
    const auto ser = clustering_empirical_serial(g);
    CHECK(par.ordered_triangles == brute_triangles(g));
    CHECK(par.ordered_triangles == ser.ordered_triangles);
    CHECK(par.ordered_wedges == ser.ordered_wedges);
    std::uint64_t wedges = 0;
    for (NodeId v = 0; v < g.node_count(); ++v) wedges += g.degree(v) * (g.degree(v) - (g.degree(v) > 0));
    CHECK(par.ordered_wedges == wedges);
  }
}

TEST_CASE("asymptotic clustering") {
  CHECK(clustering_asymptotic(DegreeDistribution::degenerate({2, 1})) ==
        doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK(clustering_asymptotic(DegreeDistribution({{{0, 2}, 0.95}, {{2, 1}, 0.05}})) ==
        doctest::Approx(0.325).epsilon(1e-14));
  CHECK(clustering_asymptotic(DegreeDistribution({{{4, 0}, 0.95}, {{2, 1}, 0.05}})) ==
        doctest::Approx(0.1 / 12.0).epsilon(1e-13));
  CHECK_THROWS_AS(clustering_asymptotic(DegreeDistribution::degenerate({1, 0})), DomainError);
}

TEST_CASE("edge list output") {
  CmcGraph g(3, {{0, 2, EdgeKind::single}, {0, 1, EdgeKind::triangle}}, {});
  std::ostringstream os;
  write_edge_list(os, g);
  CHECK(os.str() == "0 1 triangle\n0 2 single\n");
}
