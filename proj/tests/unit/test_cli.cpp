#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "rdp/capacity.hpp"
#include "rdp/wiener.hpp"
#include "rdplab/config.hpp"
#include "rdplab/output.hpp"
#include "rdplab/runner.hpp"

using namespace rdplab;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("rdplab_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void put(const fs::path& file, const std::string& text) {
  std::ofstream(file) << text;
}

std::string slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(RDPLAB_EXE) + " " + args + " > " + log.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

const char* kMinimal = R"({"name": "minimal", "task": "wiener_classify", "dimension": 2,
  "box": [[-1, 1], [-1, 1]], "h": 0.0625, "x0": [0, 0], "R": 0.25, "levels": 2, "min_rho_cells": 2,
  "expected": {"verdict": "not_wiener_point"}})";

const char* kCapacity = R"({"name": "capacity", "task": "capacity_sweep", "dimension": 2,
  "box": [[0, 1], [0, 1]], "h": 0.005, "x0": [0.5, 0.5], "radii": [0.1],
  "expected": {"analytic": true, "tolerance": 0.03}})";

const char* kLemma = R"({"name": "lemma", "task": "lemma_3_4", "triples": 5, "levels": 5})";

const char* kFailing = R"({"name": "wrong_verdict", "task": "wiener_classify", "dimension": 2,
  "box": [[-1, 1], [-1, 1]], "h": 0.0625, "x0": [0, 0], "R": 0.25, "levels": 2, "min_rho_cells": 2,
  "expected": {"verdict": "wiener_point"}})";

}  // namespace

TEST_CASE("minimal classification scenario passes") {
  TempDir t("minimal");
  RunOptions o;
  o.out = t.path;
  const RunReport r = run_scenario(parse_config(json::parse(kMinimal)), o);
  CHECK(r.status == Status::pass);
  CHECK(r.message.find("not_wiener_point") != std::string::npos);
  CHECK(fs::exists(t.path / "minimal" / "profile_0.csv"));
}

TEST_CASE("analytic capacity scenario passes") {
  TempDir t("capacity");
  RunOptions o;
  o.out = t.path;
  const RunReport r = run_scenario(parse_config(json::parse(kCapacity)), o);
  CHECK(r.status == Status::pass);
  REQUIRE(r.number("rel_error_max@0"));
  CHECK(std::abs(*r.number("rel_error_max@0")) < 0.03);
}

TEST_CASE("config validation names the key") {
  json j = json::parse(kMinimal);
  j.erase("x0");
  TempDir t("missing");
  RunOptions o;
  o.out = t.path;
  const RunReport r = run_scenario(parse_config(j), o);
  CHECK(r.status == Status::config_error);
  CHECK(r.message.find("x0") != std::string::npos);
  CHECK(exit_code(r.status) == 3);

  json bad = json::parse(kMinimal);
  bad["task"] = "nonsense";
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  bad = json::parse(kMinimal);
  bad["dimension"] = 4;
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  bad = json::parse(kMinimal);
  bad["h"] = -1;
  try {
    parse_config(bad);
    CHECK(false);
  } catch (const ConfigError& e) {
    CHECK(e.path() == "h");
  }
}

TEST_CASE("exit codes of the command line tool") {
  TempDir t("exit");
  put(t.path / "ok.json", kMinimal);
  put(t.path / "fail.json", kFailing);
  json j = json::parse(kMinimal);
  j.erase("x0");
  put(t.path / "missing.json", j.dump());
  const fs::path out = t.path / "out", log = t.path / "log.txt";

  CHECK(run_cli("--out " + out.string() + " run " + (t.path / "ok.json").string(), log) == 0);
  CHECK(run_cli("--out " + out.string() + " run " + (t.path / "fail.json").string(), log) == 1);
  CHECK(run_cli("--out " + out.string() + " run " + (t.path / "missing.json").string(), log) == 3);
  CHECK(slurp(log).find("x0") != std::string::npos);
  CHECK(run_cli("--out " + out.string() + " run " + (t.path / "absent.json").string(), log) == 3);
  CHECK(run_cli("--bogus-flag", log) == 3);
}

TEST_CASE("suites") {
  TempDir t("suite");
  const fs::path good = t.path / "good", mixed = t.path / "mixed";
  fs::create_directories(good);
  fs::create_directories(mixed);
  put(good / "a.json", kMinimal);
  put(good / "b.json", kCapacity);
  put(good / "c.json", kLemma);
  put(mixed / "a.json", kMinimal);
  put(mixed / "b.json", kFailing);

  RunOptions o;
  o.out = t.path / "out1";
  const SuiteReport s = run_suite(good, 1, o);
  CHECK(s.status == Status::pass);
  std::size_t status_rows = 0;
  std::istringstream lines(slurp(s.summary));
  for (std::string line; std::getline(lines, line);)
    if (line.find(",status,") != std::string::npos && line.rfind(",status,pass") != std::string::npos) ++status_rows;
  CHECK(status_rows == 3);

  o.out = t.path / "out4";
  const SuiteReport p = run_suite(good, 4, o);
  CHECK(slurp(p.summary) == slurp(s.summary));
  CHECK(slurp(t.path / "out1" / "capacity" / "capacity.csv") == slurp(t.path / "out4" / "capacity" / "capacity.csv"));

  o.out = t.path / "out_mixed";
  CHECK(exit_code(run_suite(mixed, 2, o).status) == 1);

  put(mixed / "dup.json", kMinimal);
  CHECK(run_suite(mixed, 1, o).status == Status::config_error);
}

TEST_CASE("output directory precedence") {
  ScenarioConfig c = parse_config(json::parse(kMinimal));
  RunOptions o;
  c.output = "from_config";
  ::unsetenv("RDP_OUT_DIR");
  CHECK(output_root(c, o) == fs::path("from_config"));
  ::setenv("RDP_OUT_DIR", "from_env", 1);
  CHECK(output_root(c, o) == fs::path("from_env"));
  o.out = "from_flag";
  CHECK(output_root(c, o) == fs::path("from_flag"));
  ::unsetenv("RDP_OUT_DIR");
  c.output.clear();
  o.out.reset();
  CHECK(output_root(c, o) == fs::path("rdp_out"));
}

TEST_CASE("plots embed their data") {
  const rdp::WienerProfile p = rdp::profile_from_delta({0, 0, 0}, 1.0, 0.5, std::vector<double>(5, 1.0));
  const std::string svg = svg_loglog("delta", "rho", {{"delta", p.rho, p.delta}, {"omega", p.rho, p.omega}});
  CHECK(svg.find("<svg") != std::string::npos);
  // Every embedded row of the delta series reads 1.
  std::istringstream in(svg.substr(svg.find("<!--")));
  int ones = 0;
  for (std::string line; std::getline(in, line);)
    if (line.rfind("delta,", 0) == 0 && line.substr(line.rfind(',') + 1) == "1") ++ones;
  CHECK(ones == 5);
  // omega = rho / R exactly, a line of slope one.
  for (std::size_t i = 0; i < p.rho.size(); ++i) CHECK(p.omega[i] == doctest::Approx(p.rho[i]));
  CHECK_THROWS_AS(svg_loglog("empty", "x", {}), std::invalid_argument);
}

TEST_CASE("heatmap of a capacitary potential stays in range") {
  const rdp::AxisRange box[2] = {{0, 1}, {0, 1}};
  const rdp::Grid g = rdp::Grid::build(2, box, 1.0 / 16);
  const auto r = rdp::harmonic_capacity(rdp::mask(g, rdp::Ball{{0.5, 0.5, 0}, 0.1}),
                                        rdp::mask(g, rdp::Ball{{0.5, 0.5, 0}, 0.45}),
                                        rdp::EllipticCoefficients::laplacian(2));
  const std::string svg = svg_heatmap("potential", r.potential, 0.0, 1.0);
  std::istringstream in(svg.substr(svg.find("<!--")));
  std::size_t rows = 0;
  std::string line;
  std::getline(in, line);  // comment opener
  std::getline(in, line);  // header
  while (std::getline(in, line) && line.find("-->") == std::string::npos) {
    const double v = std::stod(line.substr(line.rfind(',') + 1));
    CHECK(v >= -1e-9);
    CHECK(v <= 1 + 1e-9);
    ++rows;
  }
  CHECK(rows == g.node_count());
}

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 2.5e-17, 6.02e23}) CHECK(std::stod(fmt(v)) == v);
  CHECK(fmt(INFINITY) == "inf");
  CHECK(fmt(-INFINITY) == "-inf");
}
