#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include <json.hpp>

#include "cmcepi/cli.hpp"

using namespace cmcepi;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("cmcepi_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string write_config(const std::string& name, const json& cfg) {
  const auto path = scratch() / name;
  std::ofstream(path) << cfg.dump();
  return path.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

json dist1_config() {
  return {{"degree_distribution", {{2, 1, 1.0}}}, {"t_law", {{"kind", "point"}, {"t", 0.5}}}};
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (char c : line) {
      if (c == '"') quoted = !quoted;
      else if (c == ',' && !quoted) {
        cells.push_back(cell);
        cell.clear();
      } else cell += c;
    }
    cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("usage errors") {
  CHECK(run({}).code == 2);
  CHECK(run({"bogus"}).code == 2);
  CHECK(run({"analyze"}).code == 2);
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"analyze", "--config", (scratch() / "missing.json").string()}).code == 2);
  const auto bad = (scratch() / "bad.json").string();
  std::ofstream(bad) << "{not json";
  CHECK(run({"analyze", "--config", bad}).code == 2);
}

TEST_CASE("analyze") {
  auto r = run({"analyze", "--config", write_config("a.json", dist1_config())});
  REQUIRE(r.code == 0);
  auto doc = json::parse(r.out);
  CHECK(std::abs(doc["r0"].get<double>() - 1.3660) < 1e-3);
  CHECK(doc["r_v"] == doc["r0"]);
  CHECK(doc["subcritical"] == false);
  CHECK(doc["warnings"].is_array());

  auto cfg = dist1_config();
  cfg["f_v"] = 0.5;
  r = run({"analyze", "-c", write_config("b.json", cfg)});
  REQUIRE(r.code == 0);
  doc = json::parse(r.out);
  CHECK(doc["subcritical"] == true);
  CHECK(doc["outbreak_probability"] == 0.0);

  cfg = dist1_config();
  cfg["degree_distribution"] = {{2, 1, 0.5}, {1, 0, 0.4}};
  r = run({"analyze", "-c", write_config("c.json", cfg)});
  CHECK(r.code == 2);
  CHECK_FALSE(r.err.empty());

  cfg = dist1_config();
  cfg["colour"] = "blue";
  CHECK(run({"analyze", "-c", write_config("d.json", cfg)}).code == 2);
  cfg = dist1_config();
  cfg.erase("t_law");
  CHECK(run({"analyze", "-c", write_config("e.json", cfg)}).code == 2);
  cfg = dist1_config();
  cfg["t_law"] = {{"kind", "beta"}, {"alpha", -1}};
  CHECK(run({"analyze", "-c", write_config("f.json", cfg)}).code == 2);

  const auto out = (scratch() / "analyze_out.json").string();
  r = run({"analyze", "-c", write_config("a.json", dist1_config()), "--out", out});
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  CHECK(json::parse(slurp(out))["r0"].get<double>() > 1.36);
}

TEST_CASE("t_law kinds") {
  for (const json& law : {json{{"kind", "point"}, {"t", 0.3}}, json{{"kind", "bernoulli"}, {"p", 0.3}},
                          json{{"kind", "atoms"}, {"atoms", {{0.1, 0.5}, {0.5, 0.5}}}},
                          json{{"kind", "beta"}, {"alpha", 2}}, json{{"kind", "exp_period"}, {"rate", 1}},
                          json{{"kind", "const_period"}, {"duration", 0.4}}}) {
    CHECK_NOTHROW(parse_t_law(law));
  }
  CHECK_THROWS(parse_t_law(json{{"kind", "gamma"}}));
  CHECK_THROWS(parse_t_law(json{{"kind", "point"}}));
}

TEST_CASE("simulate is byte-reproducible") {
  auto cfg = dist1_config();
  cfg["n"] = 10000;
  cfg["replicates"] = 100;
  cfg["seed"] = 1;
  const auto path = write_config("sim.json", cfg);
  const auto csv1 = (scratch() / "sim1.csv").string(), csv2 = (scratch() / "sim2.csv").string();
  const auto a = run({"simulate", "-c", path, "--csv", csv1});
  const auto b = run({"simulate", "-c", path, "--csv", csv2});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(slurp(csv1) == slurp(csv2));
  const auto summary = json::parse(a.out);
  CHECK(summary["replicates"] == 100);
  CHECK(summary["seed"] == 1);
  const auto rows = csv_rows(slurp(csv1));
  REQUIRE(rows.size() == 101);
  CHECK(rows[0] == std::vector<std::string>{"replicate", "n", "final_size", "is_major", "generations_json"});
  for (std::size_t i = 1; i < rows.size(); ++i) {
    REQUIRE(rows[i].size() == 5);
    const auto gens = json::parse(rows[i][4]);
    std::size_t total = 0;
    for (const auto& g : gens) total += g.get<std::size_t>();
    CHECK(total == std::stoul(rows[i][2]));
  }
  CHECK(slurp(csv1).find('\r') == std::string::npos);

  const auto c = run({"simulate", "-c", path, "--seed", "2", "--replicates", "10", "--n", "2000"});
  REQUIRE(c.code == 0);
  const auto over = json::parse(c.out);
  CHECK(over["seed"] == 2);
  CHECK(over["replicates"] == 10);
  CHECK(over["n"] == 2000);

  cfg["t_law"] = {{"kind", "point"}, {"t", 0.0}};
  const auto zero = run({"simulate", "-c", write_config("sim0.json", cfg), "--replicates", "20"});
  REQUIRE(zero.code == 0);
  CHECK(json::parse(zero.out)["outbreak_frequency"] == 0.0);

  cfg["n"] = 10;
  CHECK(run({"simulate", "-c", write_config("small.json", cfg)}).code == 2);
}

TEST_CASE("sweep") {
  auto cfg = dist1_config();
  cfg["sweep"] = {{"alpha_grid", {16, 0.25, 4, 1}}};
  auto r = run({"sweep", "-c", write_config("sweep.json", cfg)});
  REQUIRE(r.code == 0);
  auto rows = csv_rows(r.out);
  REQUIRE(rows.size() == 5);
  CHECK(rows[0][0] == "distribution");
  CHECK(rows[0].size() == 8);
  const double alpha[] = {0.25, 1, 4, 16};
  double last_r0 = 0.0;
  for (int i = 0; i < 4; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i + 1)];
    CHECK(std::stod(row[1]) == alpha[i]);
    CHECK(std::stod(row[2]) == doctest::Approx((alpha[i] + 1) / (2 * (2 * alpha[i] + 1))).epsilon(1e-14));
    const double r0 = std::stod(row[3]);
    CHECK(r0 >= last_r0);
    last_r0 = r0;
    CHECK(std::stod(row[4]) == doctest::Approx(1 - std::stod(row[5])).epsilon(1e-14));
  }

  cfg["sweep"] = {{"alpha_grid", json::array()}};
  r = run({"sweep", "-c", write_config("sweep_empty.json", cfg)});
  REQUIRE(r.code == 0);
  rows = csv_rows(r.out);
  CHECK(rows.size() == 1);

  cfg.erase("sweep");
  r = run({"sweep", "-c", write_config("sweep_default.json", cfg)});
  REQUIRE(r.code == 0);
  CHECK(csv_rows(r.out).size() == default_alpha_grid().size() + 1);
  CHECK(default_alpha_grid().front() == doctest::Approx(0.05));
  CHECK(default_alpha_grid().back() == doctest::Approx(50.0));

  cfg = {{"degree_distributions",
          {{{"name", "d1"}, {"pmf", {{2, 1, 1.0}}}}, {{"name", "d3"}, {"pmf", {{0, 2, 0.95}, {2, 1, 0.05}}}}}},
         {"sweep", {{"alpha_grid", {1.0}}}},
         {"n", 1000},
         {"replicates", 4}};
  r = run({"sweep", "-c", write_config("sweep_mc.json", cfg)});
  REQUIRE(r.code == 0);
  rows = csv_rows(r.out);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].size() == 12);
  CHECK(rows[1][0] == "d1");
  CHECK(rows[2][0] == "d3");
}

TEST_CASE("graph-stats") {
  json cfg = {{"degree_distribution", {{0, 1, 1.0}}}, {"n", 3}};
  const auto edges = (scratch() / "edges.txt").string();
  auto r = run({"graph-stats", "-c", write_config("g3.json", cfg), "--edges", edges});
  REQUIRE(r.code == 0);
  auto doc = json::parse(r.out);
  CHECK(doc["empirical_clustering"] == 1.0);
  CHECK(slurp(edges) == "0 1 triangle\n0 2 triangle\n1 2 triangle\n");

  cfg = {{"degree_distribution", {{2, 1, 1.0}}}, {"n", 100000}, {"seed", 5}};
  r = run({"graph-stats", "-c", write_config("g1.json", cfg)});
  REQUIRE(r.code == 0);
  doc = json::parse(r.out);
  CHECK(std::abs(doc["empirical_clustering"].get<double>() - 1.0 / 6.0) <= 0.01);

  cfg = {{"degree_distribution", {{0, 2, 0.95}, {2, 1, 0.05}}}, {"n", 100000}};
  r = run({"graph-stats", "-c", write_config("g3b.json", cfg)});
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["asymptotic_clustering"].get<double>() == doctest::Approx(0.325).epsilon(1e-14));

  cfg = {{"degree_distribution", {{1, 0, 1.0}}}, {"n", 10}};
  r = run({"graph-stats", "-c", write_config("g0.json", cfg)});
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["asymptotic_clustering"].is_null());
}
