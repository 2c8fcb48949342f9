#include "cmcepi/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <string>

#include "cmcepi/errors.hpp"
#include "cmcepi/rng.hpp"

namespace cmcepi {

namespace {

constexpr std::int32_t kUninfected = -1;

// The fixed random environment of one epidemic: who is vaccinated, each
// node's weight, the initial case, and the key for per-edge coins.
struct Realization {
  std::vector<double> weight;
  std::vector<std::uint8_t> vaccinated;
  NodeId initial = 0;
  std::uint64_t edge_key = 0;

  bool open(NodeId from, NodeId to) const {
    const std::uint64_t id = (static_cast<std::uint64_t>(from) << 32) | to;
    return hashed_uniform01(edge_key ^ id) < weight[from];
  }
};

Realization realize(const CmcGraph& g, const TransmissionLaw& law, const EpidemicConfig& cfg,
                    std::uint64_t seed, std::optional<NodeId> initial) {
  const std::size_t n = g.node_count();
  if (n == 0) throw ValidationError("epidemic needs a non-empty graph");
  if (!(cfg.f_v >= 0.0 && cfg.f_v < 1.0))
    throw ValidationError("vaccination coverage must lie in [0, 1)");
  Realization rz;
  rz.vaccinated.assign(n, 0);
  std::size_t susceptible = n;
  if (cfg.f_v > 0.0) {
    Engine vacc(derive_seed(seed, 0));
    for (std::size_t i = 0; i < n; ++i) {
      rz.vaccinated[i] = uniform01(vacc) < cfg.f_v ? 1 : 0;
      susceptible -= rz.vaccinated[i];
    }
  }
  if (susceptible == 0) throw ValidationError("every node is vaccinated");
  Engine weights(derive_seed(seed, 1));
  rz.weight.resize(n);
  for (auto& w : rz.weight) w = law.sample(weights);
  if (initial) {
    if (*initial >= n || rz.vaccinated[*initial])
      throw ValidationError("initial case must be an unvaccinated node");
    rz.initial = *initial;
  } else {
    Engine pick(derive_seed(seed, 2));
    auto k = uniform_below(pick, susceptible);
    for (std::size_t i = 0; i < n; ++i) {
      if (rz.vaccinated[i]) continue;
      if (k-- == 0) {
        rz.initial = static_cast<NodeId>(i);
        break;
      }
    }
  }
  rz.edge_key = derive_seed(seed, 3);
  return rz;
}

struct Exploration {
  std::vector<std::int32_t> rank;
  std::vector<NodeId> infector;  // filled only when requested
  std::vector<std::size_t> generations;
  std::size_t total = 0;
};

// Rank-synchronous breadth-first search. Stops after completing the first
// rank at which the running total reaches `stop_at`.
Exploration explore(const CmcGraph& g, const Realization& rz, bool track_infectors,
                    std::size_t stop_at = std::numeric_limits<std::size_t>::max()) {
  const std::size_t n = g.node_count();
  Exploration ex;
  ex.rank.assign(n, kUninfected);
  if (track_infectors) ex.infector.assign(n, 0);
  std::vector<NodeId> frontier{rz.initial}, next;
  ex.rank[rz.initial] = 0;
  ex.generations.push_back(1);
  ex.total = 1;
  for (std::int32_t r = 0; !frontier.empty() && ex.total < stop_at; ++r) {
    next.clear();
    for (NodeId u : frontier) {
      for (NodeId v : g.neighbors(u)) {
        if (ex.rank[v] != kUninfected || rz.vaccinated[v] || !rz.open(u, v)) continue;
        ex.rank[v] = r + 1;
        if (track_infectors) ex.infector[v] = u;
        next.push_back(v);
      }
    }
    if (!next.empty()) ex.generations.push_back(next.size());
    ex.total += next.size();
    std::swap(frontier, next);
  }
  return ex;
}

ReplicateRecord run_replicate(const DegreeDistribution& dist, const TransmissionLaw& law,
                              std::size_t n, const EpidemicConfig& cfg, std::uint64_t seed,
                              std::size_t index) {
  const auto sub = derive_seed(seed, index);
  const auto degrees = sample_degrees(dist, n, derive_seed(sub, 0));
  const auto built = build_graph(degrees, derive_seed(sub, 1));
  auto res = simulate_once(built.graph, law, cfg, derive_seed(sub, 2));
  return {index, n, res.final_size, res.is_major, std::move(res.generations)};
}

void check_run(std::size_t n, std::size_t replicates) {
  if (n < 1000) throw ValidationError("Monte Carlo runs need n >= 1000");
  if (replicates < 1) throw ValidationError("Monte Carlo runs need at least one replicate");
}

}  // namespace

EpidemicResult simulate_once(const CmcGraph& g, const TransmissionLaw& law,
                             const EpidemicConfig& cfg, std::uint64_t seed,
                             std::optional<NodeId> initial) {
  const auto rz = realize(g, law, cfg, seed, initial);
  auto ex = explore(g, rz, false);
  EpidemicResult res;
  res.final_size = ex.total;
  res.generations = std::move(ex.generations);
  res.is_major = static_cast<double>(res.final_size) >=
                 cfg.outbreak_threshold_fraction * static_cast<double>(g.node_count());
  return res;
}

std::size_t final_size_depth_first(const CmcGraph& g, const TransmissionLaw& law,
                                   const EpidemicConfig& cfg, std::uint64_t seed,
                                   std::optional<NodeId> initial) {
  const auto rz = realize(g, law, cfg, seed, initial);
  std::vector<std::uint8_t> seen(g.node_count(), 0);
  std::vector<NodeId> stack{rz.initial};
  seen[rz.initial] = 1;
  std::size_t count = 0;
  while (!stack.empty()) {
    const NodeId u = stack.back();
    stack.pop_back();
    ++count;
    // Reverse neighbor order, so the visiting order differs from the BFS.
    const auto nb = g.neighbors(u);
    for (auto it = nb.rbegin(); it != nb.rend(); ++it) {
      const NodeId v = *it;
      if (seen[v] || rz.vaccinated[v] || !rz.open(u, v)) continue;
      seen[v] = 1;
      stack.push_back(v);
    }
  }
  return count;
}

MonteCarloSummary summarize(std::vector<ReplicateRecord> records, std::size_t n,
                            std::uint64_t seed) {
  MonteCarloSummary s;
  s.replicates = records.size();
  s.n = n;
  s.seed = seed;
  double sum = 0.0, sum_sq = 0.0;
  for (const auto& r : records) {
    if (!r.is_major) continue;
    ++s.major_count;
    const double frac = static_cast<double>(r.final_size) / static_cast<double>(n);
    sum += frac;
    sum_sq += frac * frac;
  }
  if (s.replicates > 0) {
    const double p = static_cast<double>(s.major_count) / static_cast<double>(s.replicates);
    s.outbreak_frequency = p;
    s.outbreak_frequency_se = std::sqrt(p * (1.0 - p) / static_cast<double>(s.replicates));
  }
  if (s.major_count > 0) {
    const double k = static_cast<double>(s.major_count);
    s.mean_final_fraction_major = sum / k;
    if (s.major_count > 1) {
      const double var = std::max(0.0, (sum_sq - k * s.mean_final_fraction_major *
                                                     s.mean_final_fraction_major) /
                                           (k - 1.0));
      s.final_fraction_se = std::sqrt(var / k);
    }
  }
  s.records = std::move(records);
  return s;
}

MonteCarloSummary monte_carlo_serial(const DegreeDistribution& dist, const TransmissionLaw& law,
                                     std::size_t n, std::size_t replicates,
                                     const EpidemicConfig& cfg, std::uint64_t seed) {
  check_run(n, replicates);
  std::vector<ReplicateRecord> records;
  records.reserve(replicates);
  for (std::size_t r = 0; r < replicates; ++r)
    records.push_back(run_replicate(dist, law, n, cfg, seed, r));
  return summarize(std::move(records), n, seed);
}

MonteCarloSummary monte_carlo(const DegreeDistribution& dist, const TransmissionLaw& law,
                              std::size_t n, std::size_t replicates, const EpidemicConfig& cfg,
                              std::uint64_t seed) {
  check_run(n, replicates);
  std::vector<ReplicateRecord> records(replicates);
  std::exception_ptr failure;
  const auto count = static_cast<std::int64_t>(replicates);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t r = 0; r < count; ++r) {
    try {
      records[static_cast<std::size_t>(r)] =
          run_replicate(dist, law, n, cfg, seed, static_cast<std::size_t>(r));
    } catch (...) {
#pragma omp critical(cmcepi_mc_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return summarize(std::move(records), n, seed);
}

namespace {

// Forward type (0-based) of an infected node v with rank >= 1.
int forward_type(const CmcGraph& g, const Exploration& ex, NodeId v) {
  const NodeId u = ex.infector[v];
  if (g.edge_kind(u, v) != EdgeKind::triangle) return 2;
  const auto nb = g.neighbors(u);
  const auto kinds = g.neighbor_kinds(u);
  for (std::size_t k = 0; k < nb.size(); ++k) {
    const NodeId w = nb[k];
    if (w == v || kinds[k] != EdgeKind::triangle) continue;
    if (g.edge_kind(v, w) != EdgeKind::triangle) continue;
    if (ex.rank[w] != kUninfected && ex.rank[w] <= ex.rank[v]) return 0;
  }
  return 1;
}

struct TypedCounts {
  std::array<std::array<std::size_t, 3>, 3> children{};
  std::array<std::size_t, 3> parents{};
};

TypedCounts count_typed_offspring(const CmcGraph& g, const Exploration& ex, double threshold) {
  TypedCounts c;
  std::vector<std::size_t> cumulative;
  std::size_t acc = 0;
  for (auto gsz : ex.generations) cumulative.push_back(acc += gsz);
  auto eligible = [&](std::int32_t r) {
    const auto child_rank = static_cast<std::size_t>(r) + 1;
    const std::size_t through = child_rank < cumulative.size() ? cumulative[child_rank] : acc;
    return r >= 1 && static_cast<double>(through) < threshold;
  };
  const std::size_t n = g.node_count();
  std::vector<std::int8_t> type(n, -1);
  for (NodeId v = 0; v < n; ++v)
    if (ex.rank[v] >= 1) type[v] = static_cast<std::int8_t>(forward_type(g, ex, v));
  for (NodeId v = 0; v < n; ++v) {
    if (ex.rank[v] < 1) continue;
    if (eligible(ex.rank[v])) ++c.parents[static_cast<std::size_t>(type[v])];
    const NodeId u = ex.infector[v];
    if (eligible(ex.rank[u]))
      ++c.children[static_cast<std::size_t>(type[u])][static_cast<std::size_t>(type[v])];
  }
  return c;
}

}  // namespace

ForwardMeanEstimate estimate_forward_means(const DegreeDistribution& dist,
                                           const TransmissionLaw& law, std::size_t n,
                                           std::size_t replicates, std::uint64_t seed,
                                           const EstimationOptions& opts) {
  check_run(n, replicates);
  const double threshold = opts.window_fraction * static_cast<double>(n);
  std::vector<TypedCounts> partial(replicates);
  std::exception_ptr failure;
  const auto count = static_cast<std::int64_t>(replicates);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t r = 0; r < count; ++r) {
    try {
      const auto sub = derive_seed(seed, static_cast<std::uint64_t>(r));
      const auto degrees = sample_degrees(dist, n, derive_seed(sub, 0));
      const auto built = build_graph(degrees, derive_seed(sub, 1));
      const auto rz = realize(built.graph, law, EpidemicConfig{}, derive_seed(sub, 2), std::nullopt);
      const auto ex = explore(built.graph, rz, true, static_cast<std::size_t>(threshold) + 1);
      partial[static_cast<std::size_t>(r)] = count_typed_offspring(built.graph, ex, threshold);
    } catch (...) {
#pragma omp critical(cmcepi_est_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  TypedCounts total;
  for (const auto& p : partial) {
    for (std::size_t i = 0; i < 3; ++i) {
      total.parents[i] += p.parents[i];
      for (std::size_t j = 0; j < 3; ++j) total.children[i][j] += p.children[i][j];
    }
  }
  ForwardMeanEstimate est;
  const auto m = moments(dist);
  if (m.mean_delta > 0.0) est.types = {1, 2};
  if (m.mean_s > 0.0) est.types.push_back(3);
  est.parents = total.parents;
  for (std::size_t i = 0; i < 3; ++i) {
    if (total.parents[i] == 0) continue;
    for (std::size_t j = 0; j < 3; ++j)
      est.means[i][j] =
          static_cast<double>(total.children[i][j]) / static_cast<double>(total.parents[i]);
  }
  for (int t : est.types) {
    if (total.parents[static_cast<std::size_t>(t - 1)] < opts.min_parents)
      throw InsufficientDataError("too few type-" + std::to_string(t) +
                                  " parents to estimate offspring means");
  }
  return est;
}

}  // namespace cmcepi
