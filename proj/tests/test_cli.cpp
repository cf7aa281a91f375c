// End-to-end tests of the command-line tool. The binary path is injected by
// the build as W1PLUS_CLI_BIN; every invocation goes through std::system with
// stdout/stderr captured into files under a scratch directory.

#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#ifndef W1PLUS_CLI_BIN
#error "W1PLUS_CLI_BIN must point at the CLI binary"
#endif

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

const fs::path& scratch_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "w1plus_cli_tests";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

fs::path fixture(const std::string& name, const std::string& text) {
  const fs::path p = scratch_dir() / name;
  if (!fs::exists(p)) spit(p, text);
  return p;
}

RunResult run(const std::string& args) {
  const fs::path out = scratch_dir() / "stdout.txt";
  const fs::path err = scratch_dir() / "stderr.txt";
  const std::string cmd = std::string(W1PLUS_CLI_BIN) + " " + args + " > " +
                          out.string() + " 2> " + err.string();
  const int rc = std::system(cmd.c_str());
  RunResult r;
  if (rc != -1 && WIFEXITED(rc)) r.code = WEXITSTATUS(rc);
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::string q(const fs::path& p) { return p.string(); }

fs::path p2_graph() {
  return fixture("p2.json",
                 R"({"vertices": ["0", "1", "2"], "edges": [["0", "1"], ["1", "2"]]})");
}
fs::path dirac0() { return fixture("d0.json", R"({"0": 1.0})"); }
fs::path dirac2() { return fixture("d2.json", R"({"2": 1.0})"); }

std::string thinning_args() {
  return "--graph " + q(p2_graph()) + " --f0 " + q(dirac0()) + " --f1 " + q(dirac2());
}

}  // namespace

TEST_CASE("w1 prints the value and writes the witness") {
  const fs::path witness = scratch_dir() / "witness_out.json";
  const auto r = run("w1 " + thinning_args() + " --out " + q(witness));
  CHECK(r.code == 0);
  CHECK(r.out == "2\n");

  const json w = json::parse(slurp(witness));
  REQUIRE(w.is_array());
  REQUIRE(w.size() == 1);
  CHECK(w[0]["x"] == "0");
  CHECK(w[0]["y"] == "2");
  CHECK(w[0]["mass"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("geodesic emits the curve document with the thinning coefficients") {
  const auto r = run("geodesic " + thinning_args());
  REQUIRE(r.code == 0);
  const json doc = json::parse(r.out);
  CHECK(doc["format"] == "w1plus-curve/1");
  const auto f1 = doc["curve"]["f"]["1"].get<std::vector<double>>();
  REQUIRE(f1.size() == 3);
  CHECK(f1[0] == doctest::Approx(0.0));
  CHECK(f1[1] == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(f1[2] == doctest::Approx(-2.0).epsilon(1e-13));
}

TEST_CASE("orient and weights report the expected structure") {
  const auto ro = run("orient " + thinning_args());
  REQUIRE(ro.code == 0);
  const json o = json::parse(ro.out);
  CHECK(o["arcs"].size() == 2);
  CHECK(o["sources"] == json::array({"0"}));
  CHECK(o["sinks"] == json::array({"2"}));
  CHECK(o["fixed_points"].empty());

  const auto rw = run("weights " + thinning_args());
  REQUIRE(rw.code == 0);
  const json w = json::parse(rw.out);
  CHECK(w["vertex"]["1"].get<double>() == doctest::Approx(1.0));
  CHECK(w["arc"].size() == 2);
  CHECK_FALSE(w["overflow"].get<bool>());
}

TEST_CASE("couple solves the overlapping two-point instance") {
  const fs::path f0 = fixture("tp0.json", R"({"0": 0.5, "1": 0.5})");
  const fs::path f1 = fixture("tp1.json", R"({"1": 0.5, "2": 0.5})");
  const fs::path out = scratch_dir() / "coupling_out.json";
  const auto r = run("couple --graph " + q(p2_graph()) + " --f0 " + q(f0) +
                     " --f1 " + q(f1) + " --out " + q(out));
  REQUIRE(r.code == 0);

  const json c = json::parse(slurp(out));
  CHECK(json::parse(r.out) == c);  // stdout mirrors the file
  REQUIRE(c["pi"].size() == 4);
  CHECK(c["marginal_error"].get<double>() <= 1e-12);
  // The face has one degree of freedom; the minimiser puts 1 - sqrt(2)/2 on
  // the moving cells (0,1) and (1,2) and the complement on (0,2) and (1,1).
  const double theta = 1.0 - std::sqrt(2.0) / 2.0;
  for (const auto& e : c["pi"]) {
    const bool moving =
        (e["x"] == "0" && e["y"] == "1") || (e["x"] == "1" && e["y"] == "2");
    const double expect = moving ? theta : 0.5 - theta;
    CHECK(e["mass"].get<double>() == doctest::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("sample emits the documented CSV") {
  const auto r = run("sample " + thinning_args() + " --times 0,0.5,1");
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "t,vertex,mass");
  int rows = 0;
  bool saw_midpoint = false;
  while (std::getline(in, line)) {
    ++rows;
    if (line == "0.5,1,0.5") saw_midpoint = true;
  }
  CHECK(rows == 9);
  CHECK(saw_midpoint);
}

TEST_CASE("entropy grid is validated") {
  const auto ok = run("entropy " + thinning_args() + " --grid 3");
  REQUIRE(ok.code == 0);
  std::istringstream in(ok.out);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "t,entropy");

  const auto bad = run("entropy " + thinning_args() + " --grid 1");
  CHECK(bad.code == 1);
  CHECK(json::parse(bad.err)["code"] == "invalid_argument");
}

TEST_CASE("stored curve documents feed sample and verify") {
  const fs::path curve = scratch_dir() / "curve_doc.json";
  const auto build = run("geodesic " + thinning_args() + " --out " + q(curve));
  REQUIRE(build.code == 0);

  const auto sampled = run("sample --curve " + q(curve) + " --times 0.5");
  REQUIRE(sampled.code == 0);
  CHECK(sampled.out.find("0.5,1,0.5") != std::string::npos);

  const fs::path report = scratch_dir() / "report.json";
  const auto verified = run("verify --curve " + q(curve) + " --out " + q(report));
  CHECK(verified.code == 0);
  CHECK(verified.out.find("FAIL") == std::string::npos);
  const json rep = json::parse(slurp(report));
  CHECK(rep["all_pass"].get<bool>());
  CHECK(rep["checks"].size() > 20);

  // Mixing a stored curve with raw inputs is ambiguous and rejected.
  const auto mixed = run("sample --curve " + q(curve) + " --graph " + q(p2_graph()) +
                         " --times 0.5");
  CHECK(mixed.code == 1);
  CHECK(json::parse(mixed.err)["code"] == "invalid_argument");
}

TEST_CASE("a tampered transport value fails verification with exit 3") {
  const fs::path curve = scratch_dir() / "curve_tampered.json";
  const auto build = run("geodesic " + thinning_args() + " --out " + q(curve));
  REQUIRE(build.code == 0);
  json doc = json::parse(slurp(curve));
  doc["w1"]["value"] = doc["w1"]["value"].get<double>() + 0.01;
  spit(curve, doc.dump());

  const fs::path report = scratch_dir() / "report_tampered.json";
  const auto verified = run("verify --curve " + q(curve) + " --out " + q(report));
  CHECK(verified.code == 3);
  CHECK(verified.out.find("FAIL") != std::string::npos);
  CHECK_FALSE(json::parse(slurp(report))["all_pass"].get<bool>());
}

TEST_CASE("validation failures exit 1 with a JSON error") {
  const fs::path bad = fixture("unnormalized.json", R"({"0": 0.4, "1": 0.4})");
  const auto r = run("w1 --graph " + q(p2_graph()) + " --f0 " + q(bad) + " --f1 " +
                     q(dirac2()) + " --out " + q(scratch_dir() / "unused.json"));
  CHECK(r.code == 1);
  const json err = json::parse(r.err);
  CHECK(err["code"] == "unnormalized_measure");
  CHECK(err.contains("message"));

  const auto unknown = run("frobnicate");
  CHECK(unknown.code == 1);
  CHECK(json::parse(unknown.err)["code"] == "invalid_argument");

  const auto missing = run("w1 --graph " + q(p2_graph()));
  CHECK(missing.code == 1);
  CHECK(json::parse(missing.err)["code"] == "invalid_argument");

  const auto no_inputs = run("sample --times 0.5");
  CHECK(no_inputs.code == 1);
  CHECK(json::parse(no_inputs.err)["code"] == "invalid_argument");

  const auto bad_file = run("w1 --graph /nonexistent/g.json --f0 " + q(dirac0()) +
                            " --f1 " + q(dirac2()));
  CHECK(bad_file.code == 1);
  CHECK(json::parse(bad_file.err)["code"] == "io_error");
}
