#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "cmcepi/cmc_graph.hpp"
#include "cmcepi/degree_model.hpp"
#include "cmcepi/transmission.hpp"

namespace cmcepi {

struct EpidemicConfig {
  double f_v = 0.0;
  double outbreak_threshold_fraction = 0.05;
};

struct EpidemicResult {
  std::size_t final_size = 0;
  std::vector<std::size_t> generations;  // infections per rank, generations[0] == 1
  bool is_major = false;
};

/// One percolation-style SIR outcome on g.
///
/// All randomness is a function of `seed`: vaccination uniforms and weights
/// T_i are drawn for every node in index order from separate derived
/// streams, and the directed edge i -> j is open iff a hash of (seed, i, j)
/// falls below T_i. The infected set is the set reachable from the initial
/// case over open edges between unvaccinated nodes. If `initial` is empty
/// the initial case is uniform among unvaccinated nodes.
EpidemicResult simulate_once(const CmcGraph& g, const TransmissionLaw& law,
                             const EpidemicConfig& cfg, std::uint64_t seed,
                             std::optional<NodeId> initial = std::nullopt);

/// Same outcome computed by depth-first search; used to check that the
/// infected set does not depend on exploration order.
std::size_t final_size_depth_first(const CmcGraph& g, const TransmissionLaw& law,
                                   const EpidemicConfig& cfg, std::uint64_t seed,
                                   std::optional<NodeId> initial = std::nullopt);

struct ReplicateRecord {
  std::size_t replicate = 0;
  std::size_t n = 0;
  std::size_t final_size = 0;
  bool is_major = false;
  std::vector<std::size_t> generations;
};

struct MonteCarloSummary {
  std::size_t replicates = 0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::size_t major_count = 0;
  double outbreak_frequency = 0.0;
  double outbreak_frequency_se = 0.0;  // binomial
  double mean_final_fraction_major = 0.0;
  double final_fraction_se = 0.0;  // empirical, over major outbreaks
  std::vector<ReplicateRecord> records;
};

/// Replicate r builds a fresh graph and epidemic from derive_seed(seed, r).
/// Replicates run in parallel under OpenMP; the result is identical to
/// monte_carlo_serial for any thread count.
MonteCarloSummary monte_carlo(const DegreeDistribution& dist, const TransmissionLaw& law,
                              std::size_t n, std::size_t replicates, const EpidemicConfig& cfg,
                              std::uint64_t seed);
MonteCarloSummary monte_carlo_serial(const DegreeDistribution& dist, const TransmissionLaw& law,
                                     std::size_t n, std::size_t replicates,
                                     const EpidemicConfig& cfg, std::uint64_t seed);

/// Summary statistics of a set of replicate records, in the given order.
MonteCarloSummary summarize(std::vector<ReplicateRecord> records, std::size_t n,
                            std::uint64_t seed);

struct ForwardMeanEstimate {
  std::array<std::array<double, 3>, 3> means{};  // row = parent type - 1
  std::array<std::size_t, 3> parents{};
  std::vector<int> types;  // types expected to occur, ascending
};

struct EstimationOptions {
  /// Parents count only while the infected total through their children's
  /// rank stays below this fraction of n.
  double window_fraction = 0.01;
  std::size_t min_parents = 100;
};

/// Empirical forward offspring means by parent type from early generations.
/// Throws InsufficientDataError when an expected type has too few parents.
ForwardMeanEstimate estimate_forward_means(const DegreeDistribution& dist,
                                           const TransmissionLaw& law, std::size_t n,
                                           std::size_t replicates, std::uint64_t seed,
                                           const EstimationOptions& opts = {});

}  // namespace cmcepi
