#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>

#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

struct Run {
  int code = -1;
  std::string out;  // stdout only
};

Run run(const std::string& args, const std::string& env = "") {
  std::string cmd = env + (env.empty() ? "" : " ") + SKEIN_CLI_PATH + std::string(" ") + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), static_cast<int>(buf.size()), p)) r.out += buf.data();
  int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

Json run_json(const std::string& args, int expected_code = 0) {
  Run r = run("--format json " + args);
  REQUIRE(r.code == expected_code);
  Json j = Json::parse(r.out);
  CHECK(j.contains("command"));
  CHECK(j.at("convention") == "q=e^{4iπ/N}");
  return j;
}

std::complex<double> complex_of(const Json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

fs::path scratch_dir() {
  fs::path dir = fs::temp_directory_path() / fs::path("skein_cli_test_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

std::string fixture_text(const std::string& name) {
  std::ifstream in(fs::path(SKEIN_FIXTURE_DIR) / (name + ".json"));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string replaced(std::string s, const std::string& from, const std::string& to) {
  auto at = s.find(from);
  REQUIRE(at != std::string::npos);
  return s.replace(at, from.size(), to);
}

}  // namespace

TEST_CASE("invariant prints a header and is byte-identical across runs") {
  Run a = run("invariant --input lens51");
  Run b = run("invariant --input lens51");
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.rfind("# skein-shadow invariant  N=5  q=e^{4iπ/N}\n", 0) == 0);
  CHECK(a.out.find("Z: ") != std::string::npos);
  auto j = run_json("invariant --input s1xs2");
  CHECK(j.at("N") == 5);
  // S1 x S2 with omega = 3/10: sum of squared modified dimensions
  CHECK(std::abs(complex_of(j.at("Z")) - 7.2360679775) < 1e-9);
}

TEST_CASE("invalid omega exits 2 with a machine-readable reason") {
  auto dir = scratch_dir();
  for (const char* base : {"s1xs2", "lens51"}) {
    fs::path file = dir / (std::string(base) + "_quarter.json");
    std::ofstream(file) << replaced(fixture_text(base), base == std::string("s1xs2") ? "\"K\": \"3/10\"" : "\"K\": \"1/5\"",
                                     "\"K\": \"1/4\"");
    Run r = run("--format json invariant --input " + file.string());
    CHECK(r.code == 2);
    CHECK(Json::parse(r.out).at("reason") == "omega in quarter lattice");
  }
  CHECK(run("invariant --input no_such_fixture").code == 2);
  CHECK(run("--N 6 invariant --input s1xs2").code == 2);
  CHECK(run("frobnicate").code == 2);
  fs::remove_all(dir);
}

TEST_CASE("check-kirby compares against both blow-ups") {
  auto j = run_json("invariant --input lens51_w25 --check-kirby");
  CHECK(j.at("kirby_check") == "pass");
  CHECK(j.at("kirby_deviation").get<double>() < 1e-6);
  // an impossible tolerance turns the same comparison into a failure
  CHECK(run("--tolerance 1e-12 invariant --input lens51_w25 --check-kirby").code == 1);
}

TEST_CASE("verify reports each criterion and catches a broken braiding") {
  auto j = run_json("verify --criteria 0,1,2,6");
  REQUIRE(j.at("criteria").size() == 4);
  for (const auto& c : j.at("criteria")) CHECK(c.at("passed") == true);
  CHECK(j.at("failed") == 0);
  Run bad = run("verify --inject-fault cartan-sign --criteria 0");
  CHECK(bad.code == 1);
  CHECK(bad.out.find("FAIL braiding satisfies Yang-Baxter") != std::string::npos);
  CHECK(run("verify --criteria 12").code == 2);
}

TEST_CASE("hopf tables match the open Hopf values") {
  const double pi = std::numbers::pi;
  auto j = run_json("hopf --target 'V(3/10)' --target 'P(2)'");
  const auto& rows = j.at("targets");
  CHECK(std::abs(complex_of(rows.at(0).at("scalar")) - 2.0 * std::cos(4 * pi * 0.3 / 5)) < 1e-10);
  const std::complex<double> q = std::polar(1.0, 4 * pi / 5);
  CHECK(std::abs(complex_of(rows.at(1).at("scalar")) - (std::pow(q, 3) + std::pow(q, -3))) < 1e-10);
  CHECK(std::abs(complex_of(rows.at(1).at("nilpotent")) - (q - 1.0 / q) * (q - 1.0 / q)) < 1e-10);
  auto t = run_json("hopf --color T_N --target 'P(0)'");
  CHECK(std::abs(complex_of(t.at("targets").at(0).at("scalar")) - 2.0) < 1e-9);
  CHECK(run("hopf --color 'Q(1)' --target 'P(0)'").code == 2);
}

TEST_CASE("decompose lists summands") {
  auto j = run_json("--N 7 decompose --module 'V(3/10) x V(41/100)'");
  CHECK(j.at("N") == 7);
  CHECK(j.at("summands").size() == 7);
  CHECK(j.at("character_cross_checked") == true);
  auto p = run_json("decompose --module 'V(0) x V(0)'");
  CHECK(p.at("summands").size() == 3);
}

TEST_CASE("witness and shadow") {
  auto w = run_json("witness --input s1xs2");
  CHECK(w.at("abs_certificate").get<double>() > 1e-6);
  CHECK(w.at("meridians") == 1);
  auto s = run_json("shadow --input shadow_split --cabled");
  CHECK(s.at("check") == "pass");
  CHECK(s.at("omega") == "0");
  CHECK(std::abs(complex_of(s.at("threaded")) + 2.0 * complex_of(s.at("f_link"))) < 1e-8);
  CHECK(run("shadow --input shadow_meridian --omega 1/5").code == 2);
}

TEST_CASE("fixture directory from the environment") {
  auto dir = scratch_dir();
  std::ofstream(dir / "renamed.json") << fixture_text("s1xs2");
  CHECK(run("invariant --input renamed", "SKEIN_SHADOW_FIXTURES=" + dir.string()).code == 0);
  CHECK(run("invariant --input renamed").code == 2);
  fs::remove_all(dir);
}
