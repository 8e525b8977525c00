#include "cli.hpp"

#include "selfish/chain_mdp.hpp"
#include "selfish/core_model.hpp"
#include "selfish/delay_analysis.hpp"
#include "selfish/io.hpp"
#include "selfish/mdp_engine.hpp"
#include "selfish/optimizer.hpp"
#include "selfish/simulator.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>

namespace fs = std::filesystem;

namespace selfish::cli {

namespace {

struct Common {
  double alpha = 0.0;
  double gamma = 0.0;
  std::string variant = "standard";
  int truncation = 75;
  std::string out_dir = ".";
};

class Manifest {
public:
  Manifest(std::string subcommand, const CLI::App& app) : subcommand_(std::move(subcommand)) {
    for (const CLI::Option* opt : app.get_options()) {
      if (opt->get_name() == "--help" || opt->get_name().empty()) continue;
      std::string name = opt->get_name();
      if (opt->get_expected_min() == 0) {
        params_[name] = opt->count() > 0;
      } else if (opt->count() > 0) {
        const auto& r = opt->results();
        params_[name] = r.size() == 1 ? Json(r.front()) : Json(r);
      } else {
        params_[name] = opt->get_default_str();
      }
    }
  }

  void input(const fs::path& p) { inputs_.push_back(p.string()); }
  void seed(std::uint64_t s) { seeds_.push_back(s); }

  /// Writes a data file and records it.
  void write(const fs::path& path, const std::string& content) {
    write_file_atomic(path, content);
    outputs_.push_back(path.string());
  }

  void finish(const fs::path& dir) const {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
    Json j{{"subcommand", subcommand_},
           {"parameters", params_},
           {"tool_version", kToolVersion},
           {"timestamp", stamp},
           {"inputs", inputs_},
           {"outputs", outputs_},
           {"seeds", seeds_}};
    write_file_atomic(dir / (subcommand_ + ".manifest.json"), j.dump(2) + "\n");
  }

private:
  std::string subcommand_;
  Json params_ = Json::object();
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
  std::vector<std::uint64_t> seeds_;
};

fs::path prepare_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
  return p;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void add_params(CLI::App* cmd, Common& c, bool with_alpha = true) {
  if (with_alpha) cmd->add_option("--alpha", c.alpha, "attacker hashrate share, in (0, 0.5)")->required();
  cmd->add_option("--gamma", c.gamma, "share of honest miners on the attacker's branch in a race")
      ->capture_default_str();
  cmd->add_option("--variant", c.variant, "standard | uniform")->capture_default_str();
  cmd->add_option("--T", c.truncation, "truncation")->capture_default_str();
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    const std::string item = text.substr(start, end - start);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (item.empty() || used != item.size()) {
      throw std::invalid_argument(std::string("bad value in ") + what + ": '" + item + "'");
    }
    values.push_back(v);
    start = end + 1;
  }
  return values;
}

struct LoadedPolicy {
  Policy policy;
  MiningParams params;
  std::optional<fs::path> file;
};

/// "honest", "sm1" or a policy JSON file. A file's provenance fills in
/// alpha/gamma/variant unless they were given on the command line; mismatches
/// are refused unless forced.
LoadedPolicy load_policy(const std::string& spec, const CLI::App& cmd, const Common& c, bool force) {
  const bool alpha_given = cmd.count("--alpha") > 0;
  const bool gamma_given = cmd.count("--gamma") > 0;
  const bool variant_given = cmd.count("--variant") > 0;
  if (spec == "honest" || spec == "sm1") {
    if (!alpha_given) throw std::invalid_argument("--alpha is required with a built-in policy");
    const MiningParams params(c.alpha, c.gamma, parse_variant(c.variant));
    const PolicyProvenance prov{c.alpha, c.gamma, params.variant()};
    return {Policy::from_rule(c.truncation, spec == "honest" ? honest_policy : sm1_policy, prov), params,
            std::nullopt};
  }
  Json doc;
  try {
    doc = Json::parse(read_file(spec));
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument("malformed policy file " + spec + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw std::invalid_argument(e.what());
  }
  Policy policy = policy_from_json(doc);
  const PolicyProvenance& prov = policy.provenance();
  const double alpha = alpha_given ? c.alpha : prov.alpha;
  const double gamma = gamma_given ? c.gamma : prov.gamma;
  const ProtocolVariant variant = variant_given ? parse_variant(c.variant) : prov.variant;
  if (!force && (alpha != prov.alpha || gamma != prov.gamma || variant != prov.variant)) {
    throw std::invalid_argument("policy was computed for alpha=" + format_fixed(prov.alpha, 6) +
                                " gamma=" + format_fixed(prov.gamma, 6) + " variant=" +
                                std::string(to_string(prov.variant)) + "; pass --force to evaluate it elsewhere");
  }
  return {std::move(policy), MiningParams(alpha, gamma, variant), fs::path(spec)};
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Selfish-mining policy solver"};
  app.require_subcommand(1);
  bool json_errors = false;
  app.add_flag("--json-errors", json_errors, "report failures as a JSON object on stderr");
  app.set_version_flag("--version", kToolVersion);

  Common c;
  std::function<void()> action;

  // optimize
  OptimizeConfig opt_cfg{.params = MiningParams(0.25, 0.0)};
  double opt_alpha = 0.0;
  auto* optimize = app.add_subcommand("optimize", "epsilon-optimal policy with revenue bounds");
  add_params(optimize, c);
  optimize->add_option("--eps", opt_cfg.eps, "bisection accuracy")->capture_default_str();
  optimize->add_option("--eps-prime", opt_cfg.eps_prime, "over-paying solve accuracy")->capture_default_str();
  optimize->add_option("--max-iterations", opt_cfg.max_iterations, "solver iteration cap")->capture_default_str();
  optimize->add_option("--out", c.out_dir, "output directory")->capture_default_str();
  optimize->callback([&] {
    action = [&] {
      opt_alpha = c.alpha;
      opt_cfg.params = MiningParams(opt_alpha, c.gamma, parse_variant(c.variant));
      opt_cfg.truncation = c.truncation;
      opt_cfg.validate();
      const fs::path dir = prepare_dir(c.out_dir);
      BoundsReport report = find_optimal(opt_cfg);
      report.policy.set_provenance({opt_alpha, c.gamma, opt_cfg.params.variant()});
      Manifest m("optimize", *optimize);
      m.write(dir / "bounds.json", dump(to_json(report)));
      m.write(dir / "policy.json", policy_to_json(report.policy).dump() + "\n");
      m.finish(dir);
      out << "lower " << format_fixed(report.lower_bound, 6) << "\nupper "
          << format_fixed(report.upper_bound, 6) << "\n";
    };
  });

  // threshold
  ThresholdConfig th_cfg;
  auto* threshold = app.add_subcommand("threshold", "profit threshold bracket for a given gamma");
  add_params(threshold, c, false);
  threshold->add_option("--eps", th_cfg.eps, "solver accuracy")->capture_default_str();
  threshold->add_option("--alpha-tol", th_cfg.alpha_tol, "bracket width")->capture_default_str();
  threshold->add_option("--max-iterations", th_cfg.max_iterations, "solver iteration cap")->capture_default_str();
  threshold->add_option("--out", c.out_dir, "output directory")->capture_default_str();
  threshold->callback([&] {
    action = [&] {
      th_cfg.gamma = c.gamma;
      th_cfg.variant = parse_variant(c.variant);
      th_cfg.truncation = c.truncation;
      th_cfg.validate();
      const fs::path dir = prepare_dir(c.out_dir);
      const ThresholdReport report = profit_threshold(th_cfg);
      Manifest m("threshold", *threshold);
      m.write(dir / "threshold.json", dump(to_json(report)));
      m.finish(dir);
      out << "threshold " << format_fixed(report.alpha_lower, 6) << "\nbracket ["
          << format_fixed(report.alpha_lower, 6) << ", " << format_fixed(report.bracket_upper, 6)
          << "]\n";
    };
  });

  // sweep
  SweepConfig sw_cfg;
  std::string alphas_text;
  std::string gammas_text = "0";
  auto* sweep_cmd = app.add_subcommand("sweep", "bounds over a grid of (alpha, gamma)");
  sweep_cmd->add_option("--alphas", alphas_text, "comma-separated alphas")->required();
  sweep_cmd->add_option("--gammas", gammas_text, "comma-separated gammas")->capture_default_str();
  sweep_cmd->add_option("--variant", c.variant, "standard | uniform")->capture_default_str();
  sweep_cmd->add_option("--T", c.truncation, "truncation")->capture_default_str();
  sweep_cmd->add_option("--eps", sw_cfg.eps, "bisection accuracy")->capture_default_str();
  sweep_cmd->add_option("--eps-prime", sw_cfg.eps_prime, "over-paying solve accuracy")->capture_default_str();
  sweep_cmd->add_option("--jobs", sw_cfg.jobs, "worker threads")->capture_default_str();
  sweep_cmd->add_option("--out", c.out_dir, "output directory")->capture_default_str();
  sweep_cmd->callback([&] {
    action = [&] {
      sw_cfg.alphas = parse_list(alphas_text, "--alphas");
      sw_cfg.gammas = parse_list(gammas_text, "--gammas");
      sw_cfg.variant = parse_variant(c.variant);
      sw_cfg.truncation = c.truncation;
      for (double a : sw_cfg.alphas) {
        for (double g : sw_cfg.gammas) {
          const MiningParams params(a, g, sw_cfg.variant);
          OptimizeConfig{.params = params, .truncation = sw_cfg.truncation, .eps = sw_cfg.eps,
                         .eps_prime = sw_cfg.eps_prime}
              .validate();
        }
      }
      const fs::path dir = prepare_dir(c.out_dir);
      const auto rows = sweep(sw_cfg);
      Manifest m("sweep", *sweep_cmd);
      m.write(dir / "sweep.csv", sweep_csv(rows));
      m.finish(dir);
      std::size_t failed = 0;
      for (const auto& r : rows) {
        if (!r.error.empty()) {
          ++failed;
          err << "alpha=" << format_fixed(r.alpha, 6) << " gamma=" << format_fixed(r.gamma, 6) << ": "
              << r.error << "\n";
        }
      }
      out << rows.size() << " rows written to " << (dir / "sweep.csv").string() << "\n";
      if (failed > 0) throw std::runtime_error(std::to_string(failed) + " sweep points failed");
    };
  });

  // simulate
  std::string policy_spec;
  bool force = false;
  std::uint64_t rounds = 1'000'000;
  std::uint64_t seed = 1;
  std::size_t replicas = 1;
  std::uint64_t seed_stride = 1;
  unsigned jobs = 1;
  bool sm1_tail = false;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo run of a policy");
  simulate->add_option("--policy", policy_spec, "honest | sm1 | policy JSON file")->required();
  simulate->add_option("--alpha", c.alpha, "attacker hashrate share");
  add_params(simulate, c, false);
  simulate->add_option("--rounds", rounds, "block-creation events per replica")->capture_default_str();
  simulate->add_option("--seed", seed, "generator seed")->capture_default_str();
  simulate->add_option("--replicas", replicas, "independent replicas")->capture_default_str();
  simulate->add_option("--seed-stride", seed_stride, "seed step between replicas")->capture_default_str();
  simulate->add_option("--jobs", jobs, "worker threads")->capture_default_str();
  simulate->add_flag("--sm1-tail", sm1_tail, "continue with SM1 beyond the policy's grid");
  simulate->add_flag("--force", force, "accept a policy computed for other parameters");
  simulate->add_option("--out", c.out_dir, "output directory")->capture_default_str();
  simulate->callback([&] {
    action = [&] {
      if (rounds < 1) throw std::invalid_argument("--rounds must be at least 1");
      if (replicas < 1) throw std::invalid_argument("--replicas must be at least 1");
      LoadedPolicy lp = load_policy(policy_spec, *simulate, c, force);
      const fs::path dir = prepare_dir(c.out_dir);
      Manifest m("simulate", *simulate);
      if (lp.file) m.input(*lp.file);
      const SimConfig cfg{lp.params, lp.policy, rounds, seed, sm1_tail};
      if (replicas == 1) {
        const SimResult r = simulate_policy(cfg);
        m.seed(seed);
        m.write(dir / "simulation.json", dump(to_json(r)));
        out << "rev " << format_fixed(r.rev, 6) << " +- " << format_fixed(r.std_error, 6) << "\n";
      } else {
        const BatchResult b = simulate_batch(cfg, replicas, seed_stride, jobs);
        for (const auto& r : b.replicas) m.seed(r.seed);
        m.write(dir / "simulation.json", dump(to_json(b)));
        m.write(dir / "batch.csv", batch_csv(b));
        out << "mean rev " << format_fixed(b.mean_rev, 6) << " sample std "
            << format_fixed(b.sample_std, 6) << "\n";
      }
      m.finish(dir);
    };
  });

  // evaluate
  std::string eval_out;
  auto* evaluate = app.add_subcommand("evaluate", "exact long-run revenue of a policy");
  evaluate->add_option("--policy", policy_spec, "honest | sm1 | policy JSON file")->required();
  evaluate->add_option("--alpha", c.alpha, "attacker hashrate share");
  add_params(evaluate, c, false);
  evaluate->add_flag("--force", force, "accept a policy computed for other parameters");
  evaluate->add_option("--out", eval_out, "output directory (optional)");
  evaluate->callback([&] {
    action = [&] {
      LoadedPolicy lp = load_policy(policy_spec, *evaluate, c, force);
      const auto model = build_base_model(lp.params, lp.policy.truncation());
      const PolicyEvaluation e = evaluate_policy_exact(*model, lp.policy);
      if (!eval_out.empty()) {
        const fs::path dir = prepare_dir(eval_out);
        Manifest m("evaluate", *evaluate);
        if (lp.file) m.input(*lp.file);
        m.write(dir / "evaluation.json", dump(to_json(e)));
        m.finish(dir);
      }
      out << "rev " << format_fixed(e.rev, 6) << "\n";
    };
  });

  // render
  int view = 8;
  std::string render_out;
  auto* render = app.add_subcommand("render", "policy table for small a and h");
  render->add_option("--policy", policy_spec, "honest | sm1 | policy JSON file")->required();
  render->add_option("--alpha", c.alpha, "attacker hashrate share");
  add_params(render, c, false);
  render->add_option("--view", view, "largest a and h shown")->capture_default_str();
  render->add_flag("--force", force, "accept a policy computed for other parameters");
  render->add_option("--out", render_out, "output directory (optional)");
  render->callback([&] {
    action = [&] {
      if (view < 0) throw std::invalid_argument("--view must be non-negative");
      LoadedPolicy lp = load_policy(policy_spec, *render, c, force);
      const std::string table = render_policy_table(lp.policy, lp.params, view);
      if (!render_out.empty()) {
        const fs::path dir = prepare_dir(render_out);
        Manifest m("render", *render);
        if (lp.file) m.input(*lp.file);
        m.write(dir / "policy_table.txt", table);
        m.finish(dir);
      }
      out << table;
    };
  });

  // delay
  DelayParams dp;
  double rho = 0.0;
  std::uint64_t k_cap = 1'000'000;
  std::string delay_out;
  auto* delay = app.add_subcommand("delay", "catch-up probability and profitable deviation depth");
  delay->add_option("--alpha", dp.alpha, "attacker hashrate share")->required();
  delay->add_option("--lambda", dp.lambda, "block rate")->capture_default_str();
  delay->add_option("--d-ah", dp.d_ah, "delay attacker to honest")->capture_default_str();
  delay->add_option("--d-ha", dp.d_ha, "delay honest to attacker")->capture_default_str();
  delay->add_option("--rho", rho, "baseline revenue")->required();
  delay->add_option("--k-cap", k_cap, "largest k scanned")->capture_default_str();
  delay->add_option("--out", delay_out, "output directory (optional)");
  delay->callback([&] {
    action = [&] {
      if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("--rho must be in [0, 1]");
      const double q = catchup_probability(dp);
      const auto k = min_profitable_k(dp, rho, k_cap);
      const double gain = k ? deviation_gain(*k, q, rho).lower_bound : 0.0;
      const std::string doc = dump(delay_to_json(q, k, gain));
      if (!delay_out.empty()) {
        const fs::path dir = prepare_dir(delay_out);
        Manifest m("delay", *delay);
        m.write(dir / "delay.json", doc);
        m.finish(dir);
      }
      out << doc;
    };
  });

  auto fail = [&](int code, const std::string& message) {
    if (json_errors) {
      err << Json{{"error", message}, {"exit_code", code}}.dump() << "\n";
    } else {
      err << "error: " << message << "\n";
    }
    return code;
  };

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return fail(kExitFlagError, e.what());
  }

  try {
    if (action) action();
  } catch (const CLI::ParseError& e) {
    return fail(kExitFlagError, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(kExitFlagError, e.what());
  } catch (const std::out_of_range& e) {
    return fail(kExitFlagError, e.what());
  } catch (const ConvergenceError& e) {
    return fail(kExitNumericFailure, e.what());
  } catch (const std::exception& e) {
    return fail(kExitNumericFailure, e.what());
  }
  return kExitOk;
}

} // namespace selfish::cli
