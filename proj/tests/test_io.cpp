#include "selfish/io.hpp"

#include <doctest.h>

#include <algorithm>
#include <clocale>
#include <filesystem>
#include <sstream>

using namespace selfish;
namespace fs = std::filesystem;

TEST_SUITE("io") {

TEST_CASE("state and action encodings") {
  const Json s = to_json(ChainState{3, 2, Fork::Relevant});
  CHECK(s.dump() == R"({"a":3,"h":2,"fork":"relevant"})");
  CHECK(chain_state_from_json(s) == ChainState{3, 2, Fork::Relevant});
  CHECK(to_json(Action::Wait).dump() == R"("wait")");
  CHECK(action_from_json(Json("override")) == Action::Override);
  CHECK_THROWS_AS(action_from_json(Json(3)), std::invalid_argument);
  CHECK_THROWS_AS(chain_state_from_json(Json::parse(R"({"a":1,"fork":"active"})")), std::invalid_argument);
}

TEST_CASE("policy round trip") {
  const Policy p = Policy::from_rule(6, sm1_policy, {0.35, 0.25, ProtocolVariant::UniformTieBreak});
  const Json j = policy_to_json(p);
  CHECK(j["T"] == 6);
  CHECK(j["variant"] == "uniform");
  CHECK(j["policy"].size() == 3 * 7 * 7);
  CHECK(j["policy"][0].dump() == R"({"a":0,"h":0,"fork":"irrelevant","action":"wait"})");
  const Policy back = policy_from_json(Json::parse(j.dump()));
  CHECK(back == p);
}

TEST_CASE("malformed policy documents") {
  Json j = policy_to_json(Policy::from_rule(3, honest_policy, {0.3, 0.0, ProtocolVariant::Standard}));
  Json missing = j;
  missing["policy"].erase(missing["policy"].begin() + 5);
  CHECK_THROWS_WITH_AS(policy_from_json(missing), doctest::Contains("no action for state"), std::invalid_argument);
  Json dup = j;
  dup["policy"].push_back(dup["policy"][4]);
  CHECK_THROWS_AS(policy_from_json(dup), std::invalid_argument);
  Json outside = j;
  outside["policy"][0]["a"] = 9;
  CHECK_THROWS_AS(policy_from_json(outside), std::invalid_argument);
  Json bad_action = j;
  bad_action["policy"][4]["action"] = "publish";
  CHECK_THROWS_AS(policy_from_json(bad_action), std::invalid_argument);
  Json no_t = j;
  no_t.erase("T");
  CHECK_THROWS_AS(policy_from_json(no_t), std::invalid_argument);
  CHECK_THROWS_AS(policy_from_json(Json::array()), std::invalid_argument);
}

TEST_CASE("report encodings carry their fields") {
  SolveResult sr{Policy::from_rule(2, honest_policy), 0.125, 17, 1e-9, {}};
  const Json s = to_json(sr);
  CHECK(s["gain"] == 0.125);
  CHECK(s["iterations"] == 17);
  CHECK(s["policy"].size() == 27);
  SimResult r;
  r.seed = 5;
  r.rounds = 10;
  r.attacker_blocks = 3;
  r.honest_blocks = 4;
  const Json js = to_json(r);
  for (const char* key : {"seed", "rounds", "attacker_blocks", "honest_blocks", "rev", "stderr"}) {
    CHECK(js.contains(key));
  }
  CHECK(delay_to_json(0.09, 3, 0.06).dump() == R"({"q":0.09,"min_k":3,"gain_at_min_k":0.06})");
  CHECK(delay_to_json(0.0, std::nullopt, 0.0)["min_k"].is_null());
}

TEST_CASE("fixed formatting ignores the locale") {
  const char* old = std::setlocale(LC_NUMERIC, nullptr);
  const std::string saved = old ? old : "C";
  std::setlocale(LC_NUMERIC, "de_DE.UTF-8");
  CHECK(format_fixed(0.1234567, 6) == "0.123457");
  CHECK(format_fixed(2.0 / 3.0, 6) == "0.666667");
  std::setlocale(LC_NUMERIC, saved.c_str());
}

TEST_CASE("sweep csv is strict") {
  SweepRow ok{.alpha = 0.4, .gamma = 0.0, .variant = ProtocolVariant::Standard, .truncation = 95, .eps = 1e-5,
              .honest_rev = 0.4, .sm1_rev = 0.48372, .lower_bound = 0.48866, .upper_bound = 0.48904,
              .ceiling = 2.0 / 3.0};
  SweepRow failed = ok;
  failed.error = "boom";
  const std::string csv = sweep_csv({ok, failed});
  CHECK(csv ==
        "alpha,gamma,variant,T,epsilon,honest_rev,sm1_rev,lower_bound,upper_bound,ceiling\n"
        "0.400000,0.000000,standard,95,0.000010,0.400000,0.483720,0.488660,0.489040,0.666667\n"
        "0.400000,0.000000,standard,95,0.000010,,,,,\n");
  CHECK(csv.find('\r') == std::string::npos);
  // Every line has the same number of fields.
  std::istringstream in(csv);
  for (std::string line; std::getline(in, line);) CHECK(std::count(line.begin(), line.end(), ',') == 9);
}

TEST_CASE("batch csv") {
  BatchResult b;
  b.replicas.resize(2);
  b.replicas[0].seed = 7;
  b.replicas[0].rev = 0.25;
  b.replicas[1].seed = 8;
  b.replicas[1].rev = 0.5;
  CHECK(batch_csv(b) == "replica,seed,rev\n0,7,0.250000000\n1,8,0.500000000\n");
}

TEST_CASE("policy table") {
  const MiningParams p(0.3, 0.5);
  const Policy honest = Policy::from_rule(10, honest_policy);
  const std::string t = render_policy_table(honest, p, 2);
  CHECK(t ==
        "a\\h  0   1   2\n"
        "0    *** aa* ***\n"
        "1    o** *** ***\n"
        "2    *** *** ***\n");
  const std::string sm1 = render_policy_table(Policy::from_rule(10, sm1_policy), p, 3);
  std::istringstream in(sm1);
  std::string header, row0, row1;
  std::getline(in, header);
  std::getline(in, row0);
  std::getline(in, row1);
  CHECK(row1.substr(5, 7) == "w** *m*");
  CHECK_THROWS_AS(render_policy_table(honest, p, -1), std::invalid_argument);
}

TEST_CASE("atomic writes") {
  const fs::path dir = fs::temp_directory_path() / "selfish_io_test";
  fs::create_directories(dir);
  const fs::path file = dir / "out.txt";
  write_file_atomic(file, "first\n");
  write_file_atomic(file, "second\n");
  CHECK(read_file(file) == "second\n");
  CHECK_FALSE(fs::exists(dir / "out.txt.tmp"));
  CHECK_THROWS(write_file_atomic(dir / "missing" / "x.txt", "x"));
  fs::remove_all(dir);
}

}
