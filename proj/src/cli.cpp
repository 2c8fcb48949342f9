#include "cmcepi/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "cmcepi/branching.hpp"
#include "cmcepi/cmc_graph.hpp"
#include "cmcepi/errors.hpp"
#include "cmcepi/rng.hpp"
#include "cmcepi/simulator.hpp"

namespace cmcepi {

using nlohmann::json;

namespace {

double number(const json& v, const std::string& what) {
  if (!v.is_number()) throw ValidationError(what + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ValidationError(what + " must be finite");
  return x;
}

std::size_t count(const json& v, const std::string& what) {
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ValidationError(what + " must be a nonnegative integer");
  return v.get<std::size_t>();
}

int degree_entry(const json& v, const std::string& what) {
  if (!v.is_number_integer()) throw ValidationError(what + " must be an integer");
  const auto k = v.get<long long>();
  if (k < 0 || k > 1'000'000) throw ValidationError(what + " is out of range");
  return static_cast<int>(k);
}

DegreeDistribution parse_pmf(const json& doc) {
  if (!doc.is_array() || doc.empty())
    throw ValidationError("degree distribution must be a non-empty list of [k_s, k_delta, prob]");
  std::vector<DegreeAtom> atoms;
  for (const auto& rec : doc) {
    if (!rec.is_array() || rec.size() != 3)
      throw ValidationError("degree distribution records are [k_s, k_delta, prob]");
    atoms.push_back({{degree_entry(rec[0], "k_s"), degree_entry(rec[1], "k_delta")},
                     number(rec[2], "prob")});
  }
  return DegreeDistribution(std::move(atoms));
}

void require_object(const json& doc, const std::set<std::string>& allowed, const std::string& what) {
  if (!doc.is_object()) throw ValidationError(what + " must be a JSON object");
  for (const auto& [key, _] : doc.items())
    if (!allowed.contains(key)) throw ValidationError("unknown key '" + key + "' in " + what);
}

}  // namespace

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 12; ++i) grid.push_back(0.05 * std::pow(1000.0, i / 12.0));
  return grid;
}

TransmissionLaw parse_t_law(const json& doc) {
  if (!doc.is_object() || !doc.contains("kind") || !doc["kind"].is_string())
    throw ValidationError("t_law needs a string 'kind'");
  const auto kind = doc["kind"].get<std::string>();
  auto field = [&](const char* key) {
    if (!doc.contains(key)) throw ValidationError("t_law '" + kind + "' needs '" + key + "'");
    return number(doc[key], std::string("t_law.") + key);
  };
  if (kind == "point") {
    require_object(doc, {"kind", "t"}, "t_law");
    return TransmissionLaw(PointMass{field("t")});
  }
  if (kind == "bernoulli") {
    require_object(doc, {"kind", "p"}, "t_law");
    return TransmissionLaw(BernoulliEndpoints{field("p")});
  }
  if (kind == "beta") {
    require_object(doc, {"kind", "alpha"}, "t_law");
    return TransmissionLaw(BetaSymmetric{field("alpha")});
  }
  if (kind == "exp_period") {
    require_object(doc, {"kind", "rate"}, "t_law");
    return TransmissionLaw(InfectiousPeriod{LaplaceSpec::exponential(field("rate"))});
  }
  if (kind == "const_period") {
    require_object(doc, {"kind", "duration"}, "t_law");
    return TransmissionLaw(InfectiousPeriod{LaplaceSpec::constant(field("duration"))});
  }
  if (kind == "atoms") {
    require_object(doc, {"kind", "atoms"}, "t_law");
    if (!doc.contains("atoms") || !doc["atoms"].is_array())
      throw ValidationError("t_law 'atoms' needs a list of [t, weight]");
    DiscreteAtoms law;
    for (const auto& a : doc["atoms"]) {
      if (!a.is_array() || a.size() != 2) throw ValidationError("t_law atoms are [t, weight]");
      law.atoms.push_back({number(a[0], "atom t"), number(a[1], "atom weight")});
    }
    return TransmissionLaw(std::move(law));
  }
  throw ValidationError("unknown t_law kind '" + kind + "'");
}

ExperimentConfig parse_config(const json& doc) {
  require_object(doc,
                 {"degree_distribution", "degree_distributions", "t_law", "f_v", "n", "replicates",
                  "seed", "outbreak_threshold_fraction", "sweep"},
                 "config");
  ExperimentConfig cfg;
  if (doc.contains("degree_distribution"))
    cfg.distributions.push_back({"dist", parse_pmf(doc["degree_distribution"])});
  if (doc.contains("degree_distributions")) {
    const auto& list = doc["degree_distributions"];
    if (!list.is_array()) throw ValidationError("degree_distributions must be a list");
    for (const auto& item : list) {
      require_object(item, {"name", "pmf"}, "degree_distributions entry");
      if (!item.contains("name") || !item["name"].is_string() || !item.contains("pmf"))
        throw ValidationError("degree_distributions entries need 'name' and 'pmf'");
      cfg.distributions.push_back({item["name"].get<std::string>(), parse_pmf(item["pmf"])});
    }
  }
  if (cfg.distributions.empty()) throw ValidationError("config needs a degree_distribution");
  if (doc.contains("t_law")) cfg.t_law = parse_t_law(doc["t_law"]);
  if (doc.contains("f_v")) cfg.f_v = number(doc["f_v"], "f_v");
  if (!(cfg.f_v >= 0.0 && cfg.f_v < 1.0)) throw ValidationError("f_v must lie in [0, 1)");
  if (doc.contains("n")) cfg.n = count(doc["n"], "n");
  if (doc.contains("replicates")) cfg.replicates = count(doc["replicates"], "replicates");
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_integer() || doc["seed"].get<long long>() < 0)
      throw ValidationError("seed must be a nonnegative integer");
    cfg.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("outbreak_threshold_fraction"))
    cfg.outbreak_threshold_fraction =
        number(doc["outbreak_threshold_fraction"], "outbreak_threshold_fraction");
  if (!(cfg.outbreak_threshold_fraction > 0.0 && cfg.outbreak_threshold_fraction < 1.0))
    throw ValidationError("outbreak_threshold_fraction must lie in (0, 1)");
  cfg.alpha_grid = default_alpha_grid();
  if (doc.contains("sweep")) {
    const auto& sweep = doc["sweep"];
    require_object(sweep, {"alpha_grid"}, "sweep");
    if (sweep.contains("alpha_grid")) {
      if (!sweep["alpha_grid"].is_array()) throw ValidationError("alpha_grid must be a list");
      cfg.alpha_grid.clear();
      for (const auto& a : sweep["alpha_grid"]) {
        const double alpha = number(a, "alpha");
        if (alpha <= 0.0) throw ValidationError("alpha_grid entries must be positive");
        cfg.alpha_grid.push_back(alpha);
      }
      std::sort(cfg.alpha_grid.begin(), cfg.alpha_grid.end());
    }
  }
  return cfg;
}

namespace {

json fixed_point_json(const FixedPointResult& fp) {
  return {{"q", fp.q},
          {"iterations", fp.iterations},
          {"residual", fp.residual},
          {"monotone", fp.monotone}};
}

json report_json(const AnalysisReport& r) {
  json rows = json::array();
  for (std::size_t i = 0; i < r.mean_matrix.size(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < r.mean_matrix.size(); ++j) row.push_back(r.mean_matrix(i, j));
    rows.push_back(row);
  }
  return {{"f_v", r.f_v},
          {"r0", r.r0},
          {"r_v", r.r_v},
          {"vaccinated_perron_root", r.vaccinated_perron_root},
          {"critical_coverage", r.critical_coverage},
          {"outbreak_probability", r.outbreak_probability},
          {"final_size", r.final_size},
          {"subcritical", r.subcritical},
          {"regular", r.regular},
          {"warnings", r.warnings},
          {"forward", fixed_point_json(r.forward)},
          {"backward", fixed_point_json(r.backward)},
          {"mean_matrix", {{"types", r.mean_matrix.types}, {"entries", rows}}}};
}

json summary_json(const MonteCarloSummary& s, const ExperimentConfig& cfg) {
  return {{"replicates", s.replicates},
          {"n", s.n},
          {"seed", s.seed},
          {"f_v", cfg.f_v},
          {"outbreak_threshold_fraction", cfg.outbreak_threshold_fraction},
          {"major_count", s.major_count},
          {"outbreak_frequency", s.outbreak_frequency},
          {"outbreak_frequency_se", s.outbreak_frequency_se},
          {"mean_final_fraction_major", s.mean_final_fraction_major},
          {"final_fraction_se", s.final_fraction_se}};
}

std::string records_csv(const MonteCarloSummary& s) {
  std::string csv = "replicate,n,final_size,is_major,generations_json\n";
  for (const auto& r : s.records)
    csv += fmt::format("{},{},{},{},\"{}\"\n", r.replicate, r.n, r.final_size, r.is_major ? 1 : 0,
                       json(r.generations).dump());
  return csv;
}

const DegreeDistribution& single_distribution(const ExperimentConfig& cfg, const char* cmd) {
  if (cfg.distributions.size() != 1)
    throw ValidationError(std::string(cmd) + " takes exactly one degree distribution");
  return cfg.distributions.front().dist;
}

const TransmissionLaw& required_law(const ExperimentConfig& cfg, const char* cmd) {
  if (!cfg.t_law) throw ValidationError(std::string(cmd) + " needs a t_law");
  return *cfg.t_law;
}

EpidemicConfig epidemic_config(const ExperimentConfig& cfg) {
  return {cfg.f_v, cfg.outbreak_threshold_fraction};
}

std::string cmd_analyze(const ExperimentConfig& cfg) {
  const auto report =
      analyze(single_distribution(cfg, "analyze"), required_law(cfg, "analyze"), cfg.f_v);
  return report_json(report).dump(2) + "\n";
}

std::string cmd_simulate(const ExperimentConfig& cfg, std::string& csv) {
  if (cfg.replicates < 1) throw ValidationError("simulate needs replicates >= 1");
  const auto summary = monte_carlo(single_distribution(cfg, "simulate"),
                                   required_law(cfg, "simulate"), cfg.n, cfg.replicates,
                                   epidemic_config(cfg), cfg.seed);
  csv = records_csv(summary);
  return summary_json(summary, cfg).dump(2) + "\n";
}

std::string cmd_sweep(const ExperimentConfig& cfg) {
  const bool with_mc = cfg.replicates > 0;
  std::string csv =
      "distribution,alpha,e_t2,r0,extinction_probability,outbreak_probability,final_size,"
      "critical_coverage";
  if (with_mc)
    csv += ",mc_outbreak_frequency,mc_outbreak_frequency_se,mc_mean_final_fraction_major,"
           "mc_final_fraction_se";
  csv += "\n";
  for (const auto& [name, dist] : cfg.distributions) {
    for (double alpha : cfg.alpha_grid) {
      const TransmissionLaw law(BetaSymmetric{alpha});
      const auto r = analyze(dist, law, cfg.f_v);
      csv += fmt::format("{},{},{},{},{},{},{},{}", name, alpha, raw_moment(law, 2), r.r0,
                         1.0 - r.outbreak_probability, r.outbreak_probability, r.final_size,
                         r.critical_coverage);
      if (with_mc) {
        const auto s =
            monte_carlo(dist, law, cfg.n, cfg.replicates, epidemic_config(cfg), cfg.seed);
        csv += fmt::format(",{},{},{},{}", s.outbreak_frequency, s.outbreak_frequency_se,
                           s.mean_final_fraction_major, s.final_fraction_se);
      }
      csv += "\n";
    }
  }
  return csv;
}

std::string cmd_graph_stats(const ExperimentConfig& cfg, std::string& edges) {
  const auto& dist = single_distribution(cfg, "graph-stats");
  if (cfg.n < 1) throw ValidationError("graph-stats needs n >= 1");
  const auto degrees = sample_degrees(dist, cfg.n, derive_seed(cfg.seed, 0));
  const auto built = build_graph(degrees, derive_seed(cfg.seed, 1));
  const auto stats = clustering_empirical(built.graph);
  json asymptotic = nullptr;
  try {
    asymptotic = clustering_asymptotic(dist);
  } catch (const DomainError&) {
  }
  std::ostringstream os;
  write_edge_list(os, built.graph);
  edges = os.str();
  json empirical = nullptr;
  if (stats.coefficient) empirical = *stats.coefficient;
  const auto& rep = built.report;
  return json{{"n", cfg.n},
              {"seed", cfg.seed},
              {"edges", built.graph.edge_count()},
              {"empirical_clustering", empirical},
              {"asymptotic_clustering", asymptotic},
              {"ordered_wedges", stats.ordered_wedges},
              {"ordered_triangles", stats.ordered_triangles},
              {"generation_report",
               {{"erased_single_halfedges", rep.erased_single_halfedges},
                {"erased_triangle_pairs", rep.erased_triangle_pairs},
                {"self_loops_removed", rep.self_loops_removed},
                {"multi_edges_merged", rep.multi_edges_merged}}}}
             .dump(2) +
         "\n";
}

json load_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open config '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write '" + path + "'");
  f << text;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Epidemics on random graphs with triangles"};
  app.require_subcommand(1);
  std::string config_path, out_path, csv_path, edges_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n, replicates;

  auto common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "experiment JSON")->required();
    sub->add_option("-o,--out", out_path, "output file, stdout if omitted");
    sub->add_option("--seed", seed, "override seed");
    sub->add_option("--n", n, "override n");
    sub->add_option("--replicates", replicates, "override replicates");
  };
  auto* analyze_cmd = app.add_subcommand("analyze", "branching-process analysis (JSON)");
  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo epidemics (JSON, CSV)");
  auto* sweep_cmd = app.add_subcommand("sweep", "Beta(alpha, alpha) heterogeneity sweep (CSV)");
  auto* stats_cmd = app.add_subcommand("graph-stats", "clustering of one generated graph (JSON)");
  for (auto* sub : {analyze_cmd, simulate_cmd, sweep_cmd, stats_cmd}) common(sub);
  simulate_cmd->add_option("--csv", csv_path, "per-replicate CSV");
  stats_cmd->add_option("--edges", edges_path, "edge list output");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    auto cfg = parse_config(load_json(config_path));
    if (seed) cfg.seed = *seed;
    if (n) cfg.n = *n;
    if (replicates) cfg.replicates = *replicates;
    if (analyze_cmd->parsed()) {
      emit(cmd_analyze(cfg), out_path, out);
    } else if (simulate_cmd->parsed()) {
      std::string csv;
      emit(cmd_simulate(cfg, csv), out_path, out);
      if (!csv_path.empty()) emit(csv, csv_path, out);
    } else if (sweep_cmd->parsed()) {
      emit(cmd_sweep(cfg), out_path, out);
    } else {
      std::string edges;
      emit(cmd_graph_stats(cfg, edges), out_path, out);
      if (!edges_path.empty()) emit(edges, edges_path, out);
    }
    return 0;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const InsufficientDataError& e) {
    err << "error: " << e.what() << "\n";
    return 4;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace cmcepi
