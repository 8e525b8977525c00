#include "selfish/io.hpp"

#include "selfish/chain_mdp.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace selfish {

namespace {

template <class E> E parse_enum(const Json& j, E (*parse)(std::string_view), const char* what) {
  if (!j.is_string()) throw std::invalid_argument(std::string(what) + " must be a string");
  return parse(j.get_ref<const std::string&>());
}

int int_field(const Json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_integer()) {
    throw std::invalid_argument(std::string("missing integer field '") + key + "'");
  }
  return j[key].get<int>();
}

double number_field(const Json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw std::invalid_argument(std::string("missing numeric field '") + key + "'");
  }
  return j[key].get<double>();
}

} // namespace

Json to_json(const ChainState& s) {
  return Json{{"a", s.a}, {"h", s.h}, {"fork", std::string(to_string(s.fork))}};
}

ChainState chain_state_from_json(const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("state must be an object");
  return {int_field(j, "a"), int_field(j, "h"), parse_enum<Fork>(j.at("fork"), parse_fork, "fork")};
}

Json to_json(Action action) { return std::string(to_string(action)); }

Action action_from_json(const Json& j) { return parse_enum<Action>(j, parse_action, "action"); }

Json policy_to_json(const Policy& policy) {
  const auto& prov = policy.provenance();
  Json entries = Json::array();
  for (const ChainState& s : enumerate_states(policy.truncation())) {
    Json e = to_json(s);
    e["action"] = to_json(policy(s));
    entries.push_back(std::move(e));
  }
  return Json{{"alpha", prov.alpha},
              {"gamma", prov.gamma},
              {"variant", std::string(to_string(prov.variant))},
              {"T", policy.truncation()},
              {"policy", std::move(entries)}};
}

Policy policy_from_json(const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("policy document must be an object");
  const int T = int_field(j, "T");
  const StateSpace space(T);
  PolicyProvenance prov;
  prov.alpha = number_field(j, "alpha");
  prov.gamma = number_field(j, "gamma");
  prov.variant = parse_enum<ProtocolVariant>(j.at("variant"), parse_variant, "variant");

  if (!j.contains("policy") || !j["policy"].is_array()) {
    throw std::invalid_argument("missing 'policy' array");
  }
  std::vector<Action> actions(space.size(), Action::Adopt);
  std::vector<char> seen(space.size(), 0);
  for (const Json& e : j["policy"]) {
    const ChainState s = chain_state_from_json(e);
    if (!space.contains(s)) throw std::invalid_argument("policy state outside the grid");
    const StateIndex i = space.index_of(s);
    if (seen[i]) throw std::invalid_argument("duplicate policy entry");
    seen[i] = 1;
    actions[i] = action_from_json(e.at("action"));
  }
  for (StateIndex i = 0; i < space.size(); ++i) {
    const ChainState s = space.state_of(i);
    if (!seen[i] && !space.is_boundary(s)) {
      throw std::invalid_argument("policy has no action for state (" + std::to_string(s.a) + "," +
                                  std::to_string(s.h) + "," + std::string(to_string(s.fork)) + ")");
    }
  }
  return Policy(space, std::move(actions), prov);
}

Json to_json(const SolveResult& result) {
  return Json{{"gain", result.gain},
              {"iterations", result.iterations},
              {"span", result.span},
              {"policy", policy_to_json(result.policy)["policy"]}};
}

Json to_json(const BoundsReport& report) {
  Json probes = Json::array();
  for (const RhoProbe& p : report.probes) {
    probes.push_back({{"rho", p.rho}, {"gain", p.gain}, {"iterations", p.iterations}});
  }
  return Json{{"lower_bound", report.lower_bound},
              {"upper_bound", report.upper_bound},
              {"raw_upper_bound", report.raw_upper_bound},
              {"ceiling", report.ceiling},
              {"rho_final", report.rho_final},
              {"rho_prime", report.rho_prime},
              {"low", report.low},
              {"high", report.high},
              {"final_gain", report.final_gain},
              {"overpaying_gain", report.overpaying_gain},
              {"probes", std::move(probes)}};
}

Json to_json(const ThresholdReport& report) {
  Json probes = Json::array();
  for (const ThresholdProbe& p : report.probes) {
    Json e{{"alpha", p.alpha},
           {"verdict", std::string(to_string(p.verdict))},
           {"gain_override_disabled", p.gain_override_disabled},
           {"gain_adopt_disabled", p.gain_adopt_disabled}};
    e["optimal_lower_bound"] = p.optimal_lower_bound ? Json(*p.optimal_lower_bound) : Json(nullptr);
    probes.push_back(std::move(e));
  }
  Json j{{"gamma", report.gamma},
         {"variant", std::string(to_string(report.variant))},
         {"threshold", report.alpha_lower},
         {"alpha_lower", report.alpha_lower}};
  j["alpha_upper"] = report.alpha_upper ? Json(*report.alpha_upper) : Json(nullptr);
  j["bracket_upper"] = report.bracket_upper;
  j["width"] = report.width;
  j["undecided_probes"] = report.undecided_probes;
  j["probes"] = std::move(probes);
  return j;
}

Json to_json(const SimResult& r) {
  return Json{{"seed", r.seed},
              {"rounds", r.rounds},
              {"attacker_blocks", r.attacker_blocks},
              {"honest_blocks", r.honest_blocks},
              {"rev", r.rev},
              {"stderr", r.std_error},
              {"cycles", r.cycles}};
}

Json to_json(const BatchResult& batch) {
  Json replicas = Json::array();
  for (const SimResult& r : batch.replicas) replicas.push_back(to_json(r));
  return Json{{"mean_rev", batch.mean_rev},
              {"sample_std", batch.sample_std},
              {"replicas", std::move(replicas)}};
}

Json to_json(const PolicyEvaluation& e) {
  return Json{{"rev", e.rev},
              {"attacker_rate", e.attacker_rate},
              {"honest_rate", e.honest_rate},
              {"recurrent_states", e.recurrent_states}};
}

Json delay_to_json(double q, std::optional<std::uint64_t> min_k, double gain_at_min_k) {
  Json j{{"q", q}};
  j["min_k"] = min_k ? Json(*min_k) : Json(nullptr);
  j["gain_at_min_k"] = gain_at_min_k;
  return j;
}

std::string format_fixed(double value, int decimals) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, decimals);
  if (res.ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, res.ptr);
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "alpha,gamma,variant,T,epsilon,honest_rev,sm1_rev,lower_bound,upper_bound,ceiling\n";
  for (const SweepRow& r : rows) {
    out += format_fixed(r.alpha, 6) + ',' + format_fixed(r.gamma, 6) + ',' +
           std::string(to_string(r.variant)) + ',' + std::to_string(r.truncation) + ',' +
           format_fixed(r.eps, 6) + ',';
    if (r.error.empty()) {
      out += format_fixed(r.honest_rev, 6) + ',' + format_fixed(r.sm1_rev, 6) + ',' +
             format_fixed(r.lower_bound, 6) + ',' + format_fixed(r.upper_bound, 6) + ',' +
             format_fixed(r.ceiling, 6);
    } else {
      out += ",,,,";
    }
    out += '\n';
  }
  return out;
}

std::string batch_csv(const BatchResult& batch) {
  std::string out = "replica,seed,rev\n";
  for (std::size_t k = 0; k < batch.replicas.size(); ++k) {
    out += std::to_string(k) + ',' + std::to_string(batch.replicas[k].seed) + ',' +
           format_fixed(batch.replicas[k].rev, 9) + '\n';
  }
  return out;
}

std::string render_policy_table(const Policy& policy, const MiningParams& params, int view) {
  if (view < 0) throw std::invalid_argument("table size must be non-negative");
  const int T = policy.truncation();
  const auto model = build_base_model(params, T);
  std::vector<char> visited(policy.space().size(), 0);
  for (StateIndex i : policy_reachable_states(*model, policy)) visited[i] = 1;

  std::ostringstream out;
  std::string header = "a\\h ";
  for (int h = 0; h <= view; ++h) {
    std::string col = std::to_string(h);
    col.resize(std::max<std::size_t>(col.size(), 3), ' ');
    header += ' ' + col;
  }
  header.erase(header.find_last_not_of(' ') + 1);
  out << header << '\n';
  for (int a = 0; a <= view; ++a) {
    std::string label = std::to_string(a);
    label.resize(std::max<std::size_t>(label.size(), 4), ' ');
    out << label;
    for (int h = 0; h <= view; ++h) {
      out << ' ';
      for (Fork f : kAllForks) {
        const ChainState s{a, h, f};
        const bool shown = a <= T && h <= T && visited[policy.space().index_of(s)];
        out << (shown ? action_letter(policy(s)) : '*');
      }
    }
    out << '\n';
  }
  return out.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot rename into " + path.string() + ": " + ec.message());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

} // namespace selfish
