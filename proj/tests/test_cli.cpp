#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "dimerlab/cli.hpp"
#include "dimerlab/error.hpp"
#include "json.hpp"

using namespace dimerlab;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("dimerlab_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

RunConfig small() {
  RunConfig c;
  c.coupling_mode = CouplingMode::dipole_truncated;
  c.L = 10;
  c.n = 41;
  c.r_lo = 26;
  c.r_hi = 30;
  return c;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("INI and JSON configs agree") {
  const auto ini = parse_config_text("# comment\n[model]\nZ1 = 1\ncoupling_mode = dipole  # trailing\n[grid]\nn = 41\n");
  CHECK(ini.at("model.Z1") == "1");
  CHECK(ini.at("model.coupling_mode") == "dipole");
  CHECK(ini.at("grid.n") == "41");
  const auto nested = parse_config_text(R"({"model": {"Z1": 1, "coupling_mode": "dipole"}, "grid": {"n": 41}})");
  const auto flat = parse_config_text(R"({"model.Z1": 1, "model.coupling_mode": "dipole", "grid.n": 41})");
  CHECK(nested == ini);
  CHECK(flat == ini);
  CHECK_THROWS_AS(parse_config_text("{not json"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[model\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("just words\n"), ConfigError);
}

TEST_CASE("unknown keys and bad values name the key") {
  RunConfig c;
  try {
    apply_setting(c, "model.Zl", "1");
    FAIL("no error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("model.Zl") != std::string::npos);
  }
  try {
    apply_setting(c, "grid.n", "4x");
    FAIL("no error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("grid.n") != std::string::npos);
  }
  CHECK_THROWS_AS(apply_setting(c, "solver.direct", "magic"), ConfigError);
  CHECK_THROWS_AS(apply_setting(c, "grid.n", "-3"), ConfigError);
  apply_setting(c, "model.Z1", "2.5");
  CHECK_THROWS_AS(c.atom1(), ConfigError);
}

TEST_CASE("every field round-trips through its canonical text") {
  RunConfig c = small();
  c.formats = {"csv", "json"};
  c.ion_m = -1;
  RunConfig d;
  std::istringstream in(c.canonical());
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    apply_setting(d, line.substr(0, eq), line.substr(eq + 3));
  }
  CHECK(d.canonical() == c.canonical());
  CHECK(d.hash() == c.hash());
  d.step = 0.5;
  CHECK(d.hash() != c.hash());
  c.out_dir = "elsewhere";
  CHECK(hash_hex(c.hash()).size() == 16);
}

TEST_CASE("separation window") {
  RunConfig c;
  c.r_lo = 16;
  c.r_hi = 18;
  c.step = 0.5;
  CHECK(c.separations() == std::vector<double>{16, 16.5, 17, 17.5, 18});
  c.step = 0;
  CHECK_THROWS_AS(c.separations(), ConfigError);
}

TEST_CASE("number formatting") {
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(std::nan("")) == "nan");
  CHECK(format_number(-1.0 / 0.0) == "-inf");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("exit codes") {
  std::ostringstream err;
  CommandContext ctx{small(), scratch("codes"), nullptr, 0};
  CHECK(run_command("nope", ctx, err) == 1);
  ctx.config.newton_separation = 4.0;
  CHECK(run_command("newton", ctx, err) == 3);
  ctx.config = small();
  ctx.config.r_lo = 4;
  ctx.config.r_hi = 5;
  CHECK(run_command("feshbach", ctx, err) == 3);
  ctx.config = small();
  ctx.config.ion_m = 3;
  CHECK(run_command("ions", ctx, err) == 1);
  ctx.config = small();
  ctx.config.dimension_mode = DimensionMode::radial_3d;
  CHECK(run_command("scan", ctx, err) == 1);
  CHECK(err.str().find("config error") != std::string::npos);
}

TEST_CASE("scan output is deterministic and carries the config hash") {
  const auto a = scratch("scan_a"), b = scratch("scan_b");
  std::ostringstream err;
  CommandContext ca{small(), a, nullptr, 0}, cb{small(), b, nullptr, 0};
  REQUIRE(run_command("scan", ca, err) == 0);
  REQUIRE(run_command("scan", cb, err) == 0);
  for (const char* f : {"scan.csv", "scan.json", "plot_W.dat"}) CHECK(slurp(a / f) == slurp(b / f));
  const std::string csv = slurp(a / "scan.csv");
  CHECK(csv.find(hash_hex(small().hash())) != std::string::npos);
  CHECK(csv.find("\nr,E,W,W1,W2,A,gap,valid\n") != std::string::npos);
  const auto doc = nlohmann::json::parse(slurp(a / "scan.json"));
  CHECK(doc["config_hash"] == hash_hex(small().hash()));
  CHECK(doc["result"]["rows"].size() == 5);
}

TEST_CASE("decoupled scan has zero interaction") {
  RunConfig c = small();
  c.coupling_mode = CouplingMode::decoupled;
  c.formats = {"json"};
  const auto dir = scratch("decoupled");
  std::ostringstream err;
  CommandContext ctx{c, dir, nullptr, 0};
  REQUIRE(run_command("scan", ctx, err) == 0);
  const auto doc = nlohmann::json::parse(slurp(dir / "scan.json"));
  for (const auto& row : doc["result"]["rows"]) CHECK(std::abs(row["W"].get<double>()) < 1e-13);
  CHECK_FALSE(std::filesystem::exists(dir / "scan.csv"));
}

TEST_CASE("ions, c6 and atom reports") {
  const auto dir = scratch("reports");
  std::ostringstream err;
  CommandContext ctx{small(), dir, nullptr, 0};
  REQUIRE(run_command("ions", ctx, err) == 0);
  CHECK(slurp(dir / "ions.csv").find("\nm,E1m,E2negm,sum\n") != std::string::npos);
  REQUIRE(run_command("c6", ctx, err) == 0);
  const auto c6 = nlohmann::json::parse(slurp(dir / "c6.json"))["result"];
  CHECK(c6["sigma_resolvent"].get<double>() > 0.0);
  CHECK(c6["relative_deviation"].get<double>() <= 5e-3);
  ctx.config.nmax = 1;
  ctx.warnings = 0;
  REQUIRE(run_command("c6", ctx, err) == 0);
  CHECK(ctx.warnings >= 1);

  RunConfig radial;
  radial.dimension_mode = DimensionMode::radial_3d;
  radial.L = 40;
  radial.n = 401;
  CommandContext rc{radial, dir, nullptr, 0};
  REQUIRE(run_command("atom", rc, err) == 0);
  const auto atom = nlohmann::json::parse(slurp(dir / "atom.json"))["result"]["atoms"][0];
  CHECK(std::abs(atom["E"].get<double>() + 0.25) < radial.grid().spacing() * radial.grid().spacing());
}

}
