#include "cli.hpp"
#include "selfish/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <sstream>

using namespace selfish;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("selfish_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("flag errors exit with code 2") {
  Run r = run({"optimize", "--alpha", "0.6"});
  CHECK(r.code == cli::kExitFlagError);
  CHECK(r.err.find("alpha must be < 0.5") != std::string::npos);
  CHECK(r.err.find('\n') == r.err.size() - 1);
  CHECK(run({"optimize", "--alpha", "0.35", "--gamma", "0", "--eps", "3"}).code == cli::kExitFlagError);
  CHECK(run({"optimize"}).code == cli::kExitFlagError);
  CHECK(run({}).code == cli::kExitFlagError);
  CHECK(run({"frobnicate"}).code == cli::kExitFlagError);
  CHECK(run({"optimize", "--alpha", "abc"}).code == cli::kExitFlagError);
  CHECK(run({"evaluate", "--policy", "/nonexistent/policy.json"}).code == cli::kExitFlagError);
  CHECK(run({"delay", "--alpha", "0.3", "--rho", "1.5"}).code == cli::kExitFlagError);
  CHECK(run({"sweep", "--alphas", "0.3,x"}).code == cli::kExitFlagError);
  CHECK(run({"sweep", "--alphas", "0.3", "--gammas", "2"}).code == cli::kExitFlagError);
}

TEST_CASE("machine-readable errors") {
  const Run r = run({"--json-errors", "optimize", "--alpha", "0.6"});
  CHECK(r.code == 2);
  const Json j = Json::parse(r.err);
  CHECK(j["exit_code"] == 2);
  CHECK(j["error"].get<std::string>().find("alpha must be < 0.5") != std::string::npos);
}

TEST_CASE("numeric failure exits with code 3") {
  const fs::path dir = scratch_dir("nonconvergence");
  const Run r = run({"optimize", "--alpha", "0.3", "--T", "20", "--max-iterations", "2", "--out", dir.string()});
  CHECK(r.code == cli::kExitNumericFailure);
  CHECK(r.err.find("converge") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "bounds.json"));
  fs::remove_all(dir);
}

TEST_CASE("help succeeds") {
  const Run r = run({"--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("optimize") != std::string::npos);
}

TEST_CASE("optimize then evaluate round trip") {
  const fs::path dir = scratch_dir("roundtrip");
  const Run opt = run({"optimize", "--alpha", "0.35", "--gamma", "0.5", "--T", "20", "--out", dir.string()});
  REQUIRE(opt.code == 0);
  CHECK(opt.out.rfind("lower ", 0) == 0);
  const Json bounds = Json::parse(read_file(dir / "bounds.json"));
  const Json manifest = Json::parse(read_file(dir / "optimize.manifest.json"));
  CHECK(manifest["subcommand"] == "optimize");
  CHECK(manifest["parameters"]["--alpha"] == "0.35");
  CHECK(manifest["outputs"].size() == 2);
  CHECK(manifest.contains("tool_version"));
  CHECK(manifest.contains("timestamp"));

  const std::string policy = (dir / "policy.json").string();
  const Run ev = run({"evaluate", "--policy", policy});
  REQUIRE(ev.code == 0);
  const double rev = std::stod(ev.out.substr(4));
  CHECK(std::abs(rev - bounds["lower_bound"].get<double>()) <= 2e-5);

  // Other parameters need --force.
  const Run refused = run({"evaluate", "--policy", policy, "--alpha", "0.3"});
  CHECK(refused.code == cli::kExitFlagError);
  CHECK(refused.err.find("--force") != std::string::npos);
  CHECK(run({"evaluate", "--policy", policy, "--alpha", "0.3", "--force"}).code == 0);

  const Run table = run({"render", "--policy", policy, "--view", "4"});
  CHECK(table.code == 0);
  CHECK(table.out.rfind("a\\h  0   1   2   3   4\n", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("builtin policies") {
  const Run ev = run({"evaluate", "--policy", "honest", "--alpha", "0.3", "--gamma", "0.7"});
  CHECK(ev.code == 0);
  CHECK(ev.out == "rev 0.300000\n");
  const Run honest = run({"render", "--policy", "honest", "--alpha", "0.3", "--view", "1"});
  CHECK(honest.out == "a\\h  0   1\n0    *** aa*\n1    o** ***\n");
  CHECK(run({"evaluate", "--policy", "sm1"}).code == cli::kExitFlagError);
}

TEST_CASE("delay") {
  const Run r = run({"delay", "--alpha", "0.3", "--lambda", "1", "--d-ah", "0", "--d-ha", "0", "--rho", "0.3"});
  REQUIRE(r.code == 0);
  const Json j = Json::parse(r.out);
  CHECK(j["min_k"] == 3);
  CHECK(j["q"].get<double>() == doctest::Approx(0.09));
}

TEST_CASE("simulate is reproducible from the seed") {
  const fs::path a = scratch_dir("sim_a");
  const fs::path b = scratch_dir("sim_b");
  for (const fs::path& dir : {a, b}) {
    REQUIRE(run({"simulate", "--policy", "sm1", "--alpha", "0.35", "--rounds", "20000", "--seed", "42",
                 "--replicas", "3", "--out", dir.string()})
                .code == 0);
  }
  CHECK(read_file(a / "batch.csv") == read_file(b / "batch.csv"));
  CHECK(read_file(a / "simulation.json") == read_file(b / "simulation.json"));
  const Json m = Json::parse(read_file(a / "simulate.manifest.json"));
  CHECK(m["seeds"] == Json::array({42, 43, 44}));
  const std::string csv = read_file(a / "batch.csv");
  CHECK(csv.rfind("replica,seed,rev\n0,42,", 0) == 0);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("sweep writes the csv") {
  const fs::path dir = scratch_dir("sweep");
  REQUIRE(run({"sweep", "--alphas", "0.3,0.35", "--gammas", "0", "--T", "15", "--jobs", "2", "--out", dir.string()})
              .code == 0);
  const std::string csv = read_file(dir / "sweep.csv");
  CHECK(csv.rfind("alpha,gamma,variant,T,epsilon,honest_rev,sm1_rev,lower_bound,upper_bound,ceiling\n"
                  "0.300000,0.000000,standard,15,0.000010,0.300000,",
                  0) == 0);
  fs::remove_all(dir);
}

}
