#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "cassini/cli.hpp"
#include "cassini/config.hpp"

using namespace cassini;
namespace fs = std::filesystem;

namespace {

const std::string kMinimal = R"(
[body]
M_kg = 5.6832e26
J2 = 3.1808e-5
C22 = 9.983e-6
C_over_mRe2 = 0.3414
a_km = 1.221865e6
e = 0.0289
i_rad = 5.579818e-3
Omega_dot_rad_per_year = -8.93124e-3
n_o_rad_per_year = 143.924
[truncation]
ecc_degree = 8
sqrtU_degree = 9
poly_degree = 9
r = 6
[stability]
rho0 = 1
rho0_points = 3
curve_orders = 2, 4
[scan]
nx = 2
ny = 1
sqrtU_degree = 7
r = 4
)";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("shipped Titan config matches the table values") {
  auto pc = parse_config(fs::path(CASSINI_SOURCE_DIR) / "configs" / "titan.cfg");
  CHECK(pc.warnings.empty());
  const auto t = titan_params();
  const auto& b = pc.cfg.body;
  CHECK(b.M_kg == t.M_kg);
  CHECK(b.J2 == t.J2);
  CHECK(b.C22 == t.C22);
  CHECK(b.C_norm == t.C_norm);
  CHECK(b.a_km == t.a_km);
  CHECK(b.e == t.e);
  CHECK(b.i == t.i);
  CHECK(b.Omega_dot == t.Omega_dot);
  CHECK(b.n_o == t.n_o);
  CHECK(pc.cfg.trunc.max_ecc_degree == 8);
  CHECK(pc.cfg.r == 30);
  CHECK(pc.cfg.trunc.max_sqrtU_degree >= 33);
  CHECK(pc.cfg.stability.c == 2.0);
}

TEST_CASE("empty config names every mandatory key") {
  try {
    parse_config_text("# nothing\n");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::config);
    const std::string msg = e.what();
    for (const auto& k : mandatory_config_keys()) CHECK(msg.find(k) != std::string::npos);
  }
}

TEST_CASE("duplicates: last one wins with a warning") {
  auto pc = parse_config_text(kMinimal + "[stability]\nrho0 = 2.5\n");
  CHECK(pc.cfg.stability.rho0 == 2.5);
  REQUIRE(pc.warnings.size() == 1);
  CHECK(pc.warnings[0].find("duplicate key 'stability.rho0'") != std::string::npos);
}

TEST_CASE("unknown keys warn, bad values report the line") {
  auto pc = parse_config_text(kMinimal + "[stability]\nfoo = 1\n");
  REQUIRE(pc.warnings.size() == 1);
  CHECK(pc.warnings[0].find("unknown key 'stability.foo'") != std::string::npos);

  try {
    parse_config_text(kMinimal + "[body]\nJ2 = 3.1e-5x\n", "t.cfg");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::config);
    CHECK(std::string(e.what()).find("t.cfg:27:") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config_text(kMinimal + "[truncation]\nr = 7\n"), Error);  // r + 3 > 9
  CHECK_THROWS_AS(parse_config_text(kMinimal + "oops\n"), Error);
}

TEST_CASE("overrides replace silently and enter the hash") {
  auto a = parse_config_text(kMinimal);
  auto b = parse_config_text(kMinimal, "<config>", {{"stability.rho0", "0.5"}});
  CHECK(b.cfg.stability.rho0 == 0.5);
  CHECK(b.warnings.empty());
  CHECK(config_hash(a) != config_hash(b));
  CHECK(config_hash(a) == config_hash(parse_config_text("# same\n" + kMinimal)));
  CHECK_THROWS_AS(parse_config_text(kMinimal, "<config>", {{"nope.key", "1"}}), Error);
}

TEST_CASE("exit codes are distinct per error class") {
  std::set<int> codes{0, 2};
  for (ErrorKind k : {ErrorKind::domain, ErrorKind::singular_derivative, ErrorKind::numeric,
                      ErrorKind::equilibrium_not_found, ErrorKind::inconsistent_equilibrium,
                      ErrorKind::untangling_failed, ErrorKind::not_elliptic, ErrorKind::resonance,
                      ErrorKind::degenerate_estimate, ErrorKind::integration, ErrorKind::config,
                      ErrorKind::io}) {
    CHECK(codes.insert(exit_code(k)).second);
  }
}

TEST_CASE("commands write deterministic files with provenance") {
  const fs::path dir = fs::temp_directory_path() / "cassini_cli_test";
  fs::remove_all(dir);
  auto pc = parse_config_text(kMinimal, "<config>", {{"output.directory", dir.string()}});
  std::ostringstream log;
  auto summary = run_command(Command::all, pc, log);
  CHECK(summary.contains("stability"));
  CHECK(summary["scan"]["holes"] == 0);
  const std::string header = provenance_line(Command::all, pc);
  for (const char* f : {"model.txt", "equilibrium.csv", "H0.txt", "normalform_counts.csv",
                        "divisors.csv", "stability_table.csv", "stability_curve.csv", "scan.csv"}) {
    const auto text = slurp(dir / f);
    CHECK_MESSAGE(text.rfind(header + "\n", 0) == 0, f);
  }
  const auto first = slurp(dir / "stability_curve.csv");
  CHECK(first.find("rho0,log10T,r_opt,log10T_r2,log10T_r4\n") != std::string::npos);
  run_command(Command::stability, pc, log);
  // Same content apart from the command name in the header.
  auto strip = [](const std::string& s) { return s.substr(s.find('\n')); };
  CHECK(strip(slurp(dir / "stability_curve.csv")) == strip(first));
  fs::remove_all(dir);
}
