#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmcepi/degree_model.hpp"
#include "cmcepi/transmission.hpp"

namespace cmcepi {

struct NamedDistribution {
  std::string name;
  DegreeDistribution dist;
};

struct ExperimentConfig {
  std::vector<NamedDistribution> distributions;  // at least one
  std::optional<TransmissionLaw> t_law;
  double f_v = 0.0;
  std::size_t n = 100000;
  std::size_t replicates = 0;
  std::uint64_t seed = 1;
  double outbreak_threshold_fraction = 0.05;
  std::vector<double> alpha_grid;  // ascending
};

/// Geometric grid of 13 points on [0.05, 50].
std::vector<double> default_alpha_grid();

/// Throws ValidationError on schema or value errors.
ExperimentConfig parse_config(const nlohmann::json& doc);
TransmissionLaw parse_t_law(const nlohmann::json& doc);

/// Entry point behind the executable. args excludes the program name.
/// Returns the process exit code: 0 ok, 2 config error, 3 non-convergence,
/// 4 insufficient data.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cmcepi
