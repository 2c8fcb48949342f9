#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "cmcepi/errors.hpp"
#include "cmcepi/simulator.hpp"

using namespace cmcepi;

namespace {

CmcGraph triangle_graph() {
  return CmcGraph(3, {{0, 1, EdgeKind::triangle}, {0, 2, EdgeKind::triangle}, {1, 2, EdgeKind::triangle}}, {});
}

CmcGraph random_graph(std::size_t n, std::uint64_t seed) {
  const DegreeDistribution d({{{2, 1}, 0.5}, {{1, 2}, 0.3}, {{4, 0}, 0.2}});
  return build_graph(sample_degrees(d, n, seed), seed + 1).graph;
}

}  // namespace

TEST_CASE("trivial epidemics") {
  const auto tri = triangle_graph();
  auto r = simulate_once(tri, TransmissionLaw(PointMass{1.0}), {}, 1);
  CHECK(r.final_size == 3);
  CHECK(r.generations == std::vector<std::size_t>{1, 2});

  const auto g = random_graph(500, 3);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    r = simulate_once(g, TransmissionLaw(PointMass{0.0}), {}, seed);
    CHECK(r.final_size == 1);
    CHECK(r.generations == std::vector<std::size_t>{1});
  }

  const CmcGraph edge(2, {{0, 1, EdgeKind::single}}, {});
  r = simulate_once(edge, TransmissionLaw(PointMass{1.0}), {}, 4);
  CHECK(r.final_size == 2);
}

TEST_CASE("input errors") {
  const auto tri = triangle_graph();
  EpidemicConfig nearly_all;
  nearly_all.f_v = 1.0 - 1e-12;
  CHECK_THROWS_AS(simulate_once(tri, TransmissionLaw(PointMass{0.5}), nearly_all, 2), ValidationError);
  EpidemicConfig bad;
  bad.f_v = 1.0;
  CHECK_THROWS_AS(simulate_once(tri, TransmissionLaw(PointMass{0.5}), bad, 2), ValidationError);
  CHECK_THROWS_AS(simulate_once(CmcGraph(), TransmissionLaw(PointMass{0.5}), {}, 2), ValidationError);
  CHECK_THROWS_AS(simulate_once(tri, TransmissionLaw(PointMass{0.5}), {}, 2, NodeId{7}), ValidationError);
  const DegreeDistribution d = DegreeDistribution::degenerate({2, 1});
  CHECK_THROWS_AS(monte_carlo(d, TransmissionLaw(PointMass{0.5}), 999, 5, {}, 1), ValidationError);
  CHECK_THROWS_AS(monte_carlo(d, TransmissionLaw(PointMass{0.5}), 1000, 0, {}, 1), ValidationError);
}

TEST_CASE("outcome structure and determinism") {
  const auto g = random_graph(3000, 8);
  EpidemicConfig cfg;
  cfg.f_v = 0.2;
  const TransmissionLaw law(BetaSymmetric{0.5});
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto r = simulate_once(g, law, cfg, seed);
    CHECK(r.generations.at(0) == 1);
    CHECK(std::accumulate(r.generations.begin(), r.generations.end(), std::size_t{0}) == r.final_size);
    CHECK(r.is_major == (r.final_size >= 0.05 * 3000));
    const auto again = simulate_once(g, law, cfg, seed);
    CHECK(again.final_size == r.final_size);
    CHECK(again.generations == r.generations);
    CHECK(final_size_depth_first(g, law, cfg, seed) == r.final_size);
  }
}

TEST_CASE("constant weight matches undirected bond percolation on a triangle") {
  // cluster of a node in the triangle under bond percolation with p = 1/2:
  // size 1 w.p. 1/4, size 2 w.p. 1/4, size 3 w.p. 1/2
  const auto tri = triangle_graph();
  const int runs = 40000;
  std::array<int, 4> hits{};
  for (int s = 0; s < runs; ++s)
    ++hits[simulate_once(tri, TransmissionLaw(PointMass{0.5}), {}, static_cast<std::uint64_t>(s), NodeId{0}).final_size];
  const double expect[4] = {0, 0.25, 0.25, 0.5};
  for (int k = 1; k <= 3; ++k) {
    const double p = expect[k];
    CHECK(std::abs(hits[k] / double(runs) - p) <= 5 * std::sqrt(p * (1 - p) / runs));
  }
}

TEST_CASE("more vaccination never enlarges the outbreak at matched seeds") {
  const auto g = random_graph(4000, 12);
  const TransmissionLaw law(BetaSymmetric{1.0});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::size_t previous = g.node_count() + 1;
    for (double f : {0.0, 0.1, 0.2, 0.3, 0.5}) {
      EpidemicConfig cfg;
      cfg.f_v = f;
      std::size_t size;
      try {
        size = simulate_once(g, law, cfg, seed, NodeId{0}).final_size;
      } catch (const ValidationError&) {
        break;  // node 0 is vaccinated from here on
      }
      CHECK(size <= previous);
      previous = size;
    }
  }
}

TEST_CASE("Monte Carlo harness") {
  const DegreeDistribution d = DegreeDistribution::degenerate({2, 1});
  const TransmissionLaw law(PointMass{0.5});
  const auto par = monte_carlo(d, law, 2000, 16, {}, 99);
  const auto ser = monte_carlo_serial(d, law, 2000, 16, {}, 99);
  REQUIRE(par.records.size() == 16);
  for (std::size_t i = 0; i < 16; ++i) {
    CHECK(par.records[i].replicate == i);
    CHECK(par.records[i].final_size == ser.records[i].final_size);
    CHECK(par.records[i].generations == ser.records[i].generations);
  }
  CHECK(par.outbreak_frequency == ser.outbreak_frequency);
  CHECK(par.mean_final_fraction_major == ser.mean_final_fraction_major);
  CHECK(par.seed == 99);

  const auto none = monte_carlo(d, TransmissionLaw(PointMass{0.0}), 1000, 10, {}, 5);
  CHECK(none.outbreak_frequency == 0.0);
  CHECK(none.major_count == 0);
  CHECK(none.mean_final_fraction_major == 0.0);
}

TEST_CASE("summary statistics") {
  std::vector<ReplicateRecord> recs;
  const std::size_t sizes[] = {1, 600, 2, 800};
  for (std::size_t i = 0; i < 4; ++i) recs.push_back({i, 1000, sizes[i], sizes[i] >= 50, {}});
  const auto s = summarize(recs, 1000, 3);
  CHECK(s.major_count == 2);
  CHECK(s.outbreak_frequency == 0.5);
  CHECK(s.outbreak_frequency_se == doctest::Approx(std::sqrt(0.25 / 4)));
  CHECK(s.mean_final_fraction_major == doctest::Approx(0.7));
  // sample sd of {0.6, 0.8} is sqrt(0.02); se = sd / sqrt(2)
  CHECK(s.final_fraction_se == doctest::Approx(0.1));
}

TEST_CASE("forward mean estimation") {
  const auto est = estimate_forward_means(DegreeDistribution::degenerate({3, 0}), TransmissionLaw(PointMass{0.6}),
                                          100000, 60, 21);
  CHECK(est.types == std::vector<int>{3});
  CHECK(est.parents[0] == 0);
  CHECK(est.parents[2] >= 100);
  CHECK(std::abs(est.means[2][2] - 1.2) <= 0.05);
  CHECK(est.means[2][0] == 0.0);

  CHECK_THROWS_AS(estimate_forward_means(DegreeDistribution::degenerate({2, 1}), TransmissionLaw(PointMass{0.0}),
                                         10000, 20, 1),
                  InsufficientDataError);
}
