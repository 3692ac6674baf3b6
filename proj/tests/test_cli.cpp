#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "psvf/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "psvf");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = psvf::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "psvf_test_cli";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  fs::remove(p);
  return p;
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

const std::string kCanon = "a=-1,b=-1,c=1,d=-2,lambda=0";

}  // namespace

TEST_CASE("classify") {
  Run r = run({"classify", "--builtin", kCanon, "--point", "1,0,0"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("Sliding\n", 0) == 0);

  r = run({"classify", "--builtin", kCanon, "--point", "0,0,0"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("Tangential: CuspFold\n", 0) == 0);

  CHECK(run({"classify", "--point", "1,0"}).code == 2);
  CHECK(run({"classify", "--point", "1,zero,0"}).code == 2);
  CHECK(run({"classify", "--builtin", "a=-1,q=2", "--point", "1,0,0"}).code == 2);
  CHECK(run({"classify", "--builtin", "b=0", "--point", "1,0,0"}).code == 2);
  CHECK(run({"classify", "--point", "0,0,1"}).code == 1);

  const std::string sys = std::string(PSVF_DATA_DIR) + "/cuspfold.psvf";
  r = run({"classify", "--system", sys, "--point", "0,0,0"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("Tangential: CuspFold", 0) == 0);
  CHECK(run({"classify", "--system", sys, "--builtin", kCanon, "--point", "1,0,0"}).code == 2);
  CHECK(run({"classify", "--system", "/nonexistent.psvf", "--point", "1,0,0"}).code == 2);

  const fs::path csv = scratch("grid.csv");
  r = run({"classify", "--x-range", "-1:1:0.5", "--y-range", "-1:1:1", "--out", csv.string()});
  CHECK(r.code == 0);
  const std::string text = slurp(csv);
  CHECK(text.rfind("x,y,z,region,x_contact,y_contact,combined\n", 0) == 0);
  CHECK(count_lines(text) == 1 + 5 * 3);
  CHECK(text.find("0,0,0,Tangential,Cusp,FoldInvisible,CuspFold") != std::string::npos);
}

TEST_CASE("simulate") {
  const fs::path csv = scratch("traj.csv");
  Run r = run({"simulate", "--point", "1,-1,0.01", "--t-max", "0", "--out", csv.string()});
  CHECK(r.code == 0);
  CHECK(slurp(csv) == "t,x,y,z,mode,event\n0,1,-1,0.01,X,\n");
  const fs::path summary = csv.parent_path() / "traj.summary.json";
  REQUIRE(fs::exists(summary));
  const auto j = nlohmann::json::parse(slurp(summary));
  CHECK(j["branches"][0]["status"] == "TimeLimit");
  CHECK(j["config"]["t_max"] == 0.0);
  CHECK(j["config"]["seed"] == 42);

  const fs::path esc = scratch("esc.csv");
  fs::remove(esc.parent_path() / "esc.branch1.csv");
  r = run({"simulate", "--point", "-1,-2,0", "--t-max", "1", "--escape-policy", "both", "--out",
           esc.string()});
  CHECK(r.code == 0);
  CHECK(fs::exists(esc));
  CHECK(fs::exists(esc.parent_path() / "esc.branch1.csv"));
  CHECK(r.out.find("branch 1") != std::string::npos);

  r = run({"simulate", "--point", "-1,-2,0", "--t-max", "1", "--escape-policy", "x"});
  CHECK(r.code == 0);
  CHECK(r.out.find("branch 1") == std::string::npos);

  r = run({"simulate", "--lambda", "-0.05", "--point", "0.5,0,0", "--t-max", "20"});
  CHECK(r.code == 0);
  CHECK(r.out.find("ExitSliding") != std::string::npos);

  CHECK(run({"simulate", "--point", "0,0,0", "--escape-policy", "sideways"}).code == 2);
  CHECK(run({"simulate", "--point", "5000,0,0"}).code == 1);
  CHECK(run({"simulate"}).code == 2);
}

TEST_CASE("return-map") {
  Run r = run({"return-map", "--point", "1,-1", "--lambda", "0"});
  CHECK(r.code == 0);
  CHECK(r.out.find("= (2, -9)") != std::string::npos);

  r = run({"return-map", "--point", "0,0"});
  CHECK(r.code == 0);
  CHECK(r.out.find("fixed point") != std::string::npos);

  r = run({"return-map", "--eigen", "--lambda", "0.1"});
  CHECK(r.code == 0);
  CHECK(r.out.find("xi_plus*xi_minus=1") != std::string::npos);
  CHECK(r.out.find("xi_plus=77.98717738") != std::string::npos);

  r = run({"return-map", "--eigen"});
  CHECK(r.code == 0);
  CHECK(r.out.find("status=LambdaZero") != std::string::npos);

  r = run({"return-map", "--point", "0,1"});
  CHECK(r.code == 0);
  CHECK(r.out.find("status=ComplexBranch") != std::string::npos);

  const fs::path js = scratch("orbit.json");
  r = run({"return-map", "--point", "0.1,-0.05", "--iterate", "10", "--out", js.string()});
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(slurp(js));
  CHECK(j["orbit"]["status"] == "ReachedSliding");

  CHECK(run({"return-map"}).code == 2);
  CHECK(run({"return-map", "--system", "x.psvf", "--point", "1,-1"}).code == 2);
}

TEST_CASE("verify") {
  Run r = run({"verify", "--suite", "curve-images", "--lambda", "0.1"});
  CHECK(r.code == 2);
  CHECK(r.err.find("refused") != std::string::npos);
  CHECK(run({"verify", "--suite", "nonsense"}).code == 2);
  CHECK(run({"verify", "--suite", "theorem-a", "--builtin", "a=1"}).code == 2);

  const fs::path js = scratch("lemmas.json");
  r = run({"verify", "--suite", "curve-images,strip-containment,monotone-growth", "--out", js.string()});
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(slurp(js));
  CHECK(j["verdict"] == "pass");
  CHECK(j["params"]["lambda"] == 0.0);
  CHECK(j["seeds"]["sampling"] == 42);
  CHECK(j["config"]["delta"] == 0.2);
  CHECK(j["config"]["t_max"] == 200.0);
  CHECK(j["config"]["event_tol"] == 1e-12);
  CHECK(j["config"]["max_events"] == 100000);
  CHECK(j.contains("config_digest"));
  CHECK(j.contains("samples"));
  CHECK(j["checks"].size() == 4);

  r = run({"verify", "--suite", "theorem-a", "--lambda", "-0.05", "--samples", "20"});
  CHECK(r.code == 0);
  CHECK(r.out.find("PASS theorem-a: NotLyapunovStable") != std::string::npos);

  r = run({"verify", "--suite", "escape-certificate", "--lambda", "-0.05"});
  CHECK(r.code == 0);
}

TEST_CASE("sweep") {
  const fs::path empty = scratch("empty.csv");
  Run r = run({"sweep", "--lambda-range", "0.1:-0.1:0.02", "--out", empty.string()});
  CHECK(r.code == 0);
  const std::string header = slurp(empty);
  CHECK(count_lines(header) == 1);
  CHECK(header.rfind("a,b,c,d,lambda,verdict", 0) == 0);

  const fs::path csv = scratch("sweep.csv");
  const std::vector<std::string> args = {"sweep", "--lambda-range", "-0.02:0.02:0.02", "--samples", "5",
                                         "--out", csv.string()};
  r = run(args);
  CHECK(r.code == 0);
  const std::string first = slurp(csv);
  CHECK(count_lines(first) == 4);
  CHECK(first.find("\n-1,-1,1,-2,-0.02,NotLyapunovStable,") != std::string::npos);
  CHECK(first.find("\n-1,-1,1,-2,0,") != std::string::npos);

  std::vector<std::string> resume = args;
  resume.push_back("--resume");
  r = run(resume);
  CHECK(r.code == 0);
  CHECK(r.out.find("0 new rows, 3 existing") != std::string::npos);
  CHECK(slurp(csv) == first);

  // a torn file keeps complete rows and recomputes the rest
  {
    const std::size_t cut = first.rfind('\n', first.size() - 2);
    std::ofstream f(csv, std::ios::binary | std::ios::trunc);
    f << first.substr(0, cut + 10);
  }
  r = run(resume);
  CHECK(r.code == 0);
  CHECK(r.out.find("1 new rows, 2 existing") != std::string::npos);
  CHECK(slurp(csv) == first);

  const fs::path bad = scratch("bad.csv");
  r = run({"sweep", "--lambda-range", "0:0:1", "--b-range", "0:0:1", "--samples", "3", "--out",
           bad.string()});
  CHECK(r.code == 0);
  CHECK(slurp(bad).find("RegimeViolation") != std::string::npos);

  CHECK(run({"sweep", "--lambda-range", "0:1"}).code == 2);
  CHECK(run({"sweep", "--resume"}).code == 2);
}

TEST_CASE("help and usage") {
  CHECK(run({"--help"}).code == 0);
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
}
