#include "ifp/cli.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "ifp/error.hpp"

namespace ifp::cli {

namespace fs = std::filesystem;
using io::Json;

namespace {

constexpr std::array<const char*, 6> kCommands{"check", "ampc", "solve", "garch-discretize", "garch-estimate",
                                               "figures"};

double get_number(const Json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw InputError(std::string("'") + key + "' must be a number");
  return j[key].get<double>();
}

double get_positive(const Json& j, const char* key, double fallback) {
  const double v = get_number(j, key, fallback);
  if (!(v > 0.0) || !std::isfinite(v)) throw InputError(std::string("'") + key + "' must be positive");
  return v;
}

std::size_t get_count(const Json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_unsigned()) throw InputError(std::string("'") + key + "' must be a nonnegative integer");
  return j[key].get<std::size_t>();
}

const Json& section(const Json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_object()) throw InputError(std::string("config needs an object '") + key + "'");
  return j[key];
}

fs::path existing_file(const Json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) throw InputError(std::string("'") + key + "' must be a path string");
  fs::path p = j[key].get<std::string>();
  if (!fs::is_regular_file(p)) throw InputError("file not found: " + p.string());
  return p;
}

Json envelope(const std::string& command, const Json& resolved) {
  return Json{{"command", command}, {"version", io::version()}, {"config", resolved}};
}

void write_json(const fs::path& path, const Json& j) { io::write_text_file(path, j.dump(2) + "\n"); }

// Environment forms:
//   {gamma, P, states}                  inline
//   {file}                              environment or GARCH chain JSON document
//   {garch: {...}, n_eps, n_v, beta}    chain built on the fly
// Chain-based forms take beta, gamma (defaults to the document's gamma) and optional growth;
// growth detrends with CRRA utility.
MarkovEnvironment resolve_environment(const Json& spec, Json& resolved) {
  resolved = spec;
  Json doc = spec;
  if (spec.contains("file")) doc = io::read_json_file(existing_file(spec, "file"));

  const bool is_chain = doc.contains("v_grid") || spec.contains("garch");
  if (!is_chain) {
    MarkovEnvironment env = io::environment_from_json(doc);
    if (spec.contains("gamma")) env = env.with_gamma(get_positive(spec, "gamma", 0.0));
    if (spec.contains("growth")) {
      const double g = get_number(spec, "growth", 0.0);
      env = spec.contains("detrended_income")
                ? detrend(env, Utility::crra(env.gamma()), g, get_number(spec, "detrended_income", 1.0))
                : detrend(env, Utility::crra(env.gamma()), g);
    }
    return env;
  }

  GarchChain chain = spec.contains("garch")
                         ? build_chain(io::garch_spec_from_json(spec["garch"]), get_count(spec, "n_eps", 7),
                                       get_count(spec, "n_v", 3))
                         : io::garch_chain_from_json(doc);
  if (spec.contains("garch")) {
    resolved["n_eps"] = chain.n_eps();
    resolved["n_v"] = chain.n_v();
  }
  const double beta = get_positive(spec, "beta", 0.0);
  if (!spec.contains("gamma")) throw InputError("chain environment needs 'gamma'");
  const double gamma = get_positive(spec, "gamma", 0.0);
  const double income = get_positive(spec, "income", 1.0);
  resolved["income"] = income;
  MarkovEnvironment env = chain_environment(chain, beta, gamma, income);
  if (spec.contains("growth")) env = detrend(env, Utility::crra(gamma), get_number(spec, "growth", 0.0), income);
  return env;
}

int cmd_check(const Json& cfg, const fs::path& out_dir, std::ostream& out) {
  Json resolved = cfg;
  const MarkovEnvironment env = resolve_environment(section(cfg, "environment"), resolved["environment"]);
  const ConditionReport report = check_conditions(env);
  Json doc = envelope("check", resolved);
  doc["result"] = io::to_json(report);
  write_json(out_dir / "check.json", doc);
  out << doc["result"].dump(2) << "\n";
  return report.assumption2_ok ? kOk : kConditionFailed;
}

FixedPointOptions fixed_point_options(const Json& cfg, Json& resolved) {
  FixedPointOptions opt;
  const Json j = cfg.value("fixed_point", Json::object());
  opt.tol = get_positive(j, "tol", opt.tol);
  opt.max_iter = static_cast<int>(get_count(j, "max_iter", static_cast<std::size_t>(opt.max_iter)));
  opt.seed_agreement = get_positive(j, "seed_agreement", opt.seed_agreement);
  resolved["fixed_point"] = {{"tol", opt.tol}, {"max_iter", opt.max_iter}, {"seed_agreement", opt.seed_agreement}};
  return opt;
}

int cmd_ampc(const Json& cfg, const fs::path& out_dir, std::ostream& out) {
  Json resolved = cfg;
  const MarkovEnvironment env = resolve_environment(section(cfg, "environment"), resolved["environment"]);
  const Utility u = io::utility_from_json(cfg.value("utility", Json::object()), env.gamma());
  const FixedPointOptions opt = fixed_point_options(cfg, resolved);
  const AmpcSolution sol = solve_fixed_point(env, u.rra_lower(), u.rra_upper(), opt);
  const ConditionReport report = check_conditions(env);

  Json doc = envelope("ampc", resolved);
  doc["result"] = io::to_json(sol);
  doc["result"]["radii"] = {{"r_PDbeta", report.r_PDbeta},
                            {"r_PDbetaR", report.r_PDbetaR},
                            {"r_PDbetaR1mg", report.r_PDbetaR1mg}};
  doc["result"]["utility"] = io::to_json(u);
  write_json(out_dir / "ampc.json", doc);
  out << doc["result"].dump(2) << "\n";
  if (!sol.converged) throw NumericalError("fixed-point iteration did not converge");
  return kOk;
}

int cmd_solve(const Json& cfg, const fs::path& out_dir, int threads, std::ostream& out) {
  Json resolved = cfg;
  const MarkovEnvironment env = resolve_environment(section(cfg, "environment"), resolved["environment"]);
  const Utility u = io::utility_from_json(cfg.value("utility", Json::object()), env.gamma());

  const Json g = cfg.value("grid", Json::object());
  const double a_min = get_positive(g, "a_min", 1e-4);
  const double a_max = get_positive(g, "a_max", 1e8);
  const double median = get_positive(g, "median", 1.0);
  const std::size_t n = get_count(g, "n", 200);
  resolved["grid"] = {{"a_min", a_min}, {"a_max", a_max}, {"median", median}, {"n", n}};

  PolicyOptions opt;
  const Json p = cfg.value("policy", Json::object());
  opt.tol = get_positive(p, "tol", opt.tol);
  opt.rel_tol = get_positive(p, "rel_tol", opt.rel_tol);
  opt.max_iter = static_cast<int>(get_count(p, "max_iter", static_cast<std::size_t>(opt.max_iter)));
  opt.threads = threads;
  resolved["policy"] = {{"tol", opt.tol}, {"rel_tol", opt.rel_tol}, {"max_iter", opt.max_iter}};

  const AssetGrid grid = AssetGrid::exponential(a_min, a_max, median, n);
  const PolicySolution sol = iterate_policy(env, u, grid, opt);

  std::ostringstream csv;
  io::write_policy_csv(csv, sol);
  io::write_text_file(out_dir / "policy.csv", csv.str());

  Json doc = envelope("solve", resolved);
  doc["result"] = {{"iterations", sol.iterations},
                   {"converged", sol.converged},
                   {"final_rho", sol.rho_trace.empty() ? 0.0 : sol.rho_trace.back()},
                   {"contraction_modulus", sol.contraction_modulus},
                   {"slope_tail", sol.slope_tail},
                   {"utility", io::to_json(u)}};
  write_json(out_dir / "solve.json", doc);
  out << "iterations " << sol.iterations << " final_rho " << format_number(doc["result"]["final_rho"].get<double>())
      << (sol.converged ? "" : " (not converged)") << "\n";
  if (!sol.converged) throw NumericalError("policy iteration did not converge within max_iter");
  return kOk;
}

GarchSpec spec_source(const Json& cfg, Json& resolved) {
  if (cfg.contains("garch")) return io::garch_spec_from_json(cfg["garch"]);
  if (cfg.contains("spec_file")) {
    const Json doc = io::read_json_file(existing_file(cfg, "spec_file"));
    const GarchSpec s = io::garch_spec_from_json(doc.contains("result") ? doc["result"]["spec"] : doc);
    resolved["garch"] = io::to_json(s);
    return s;
  }
  throw InputError("garch-discretize needs 'garch' parameters or a 'spec_file'");
}

int cmd_garch_discretize(const Json& cfg, const fs::path& out_dir, std::ostream& out) {
  Json resolved = cfg;
  const GarchSpec spec = spec_source(cfg, resolved);
  const std::size_t n_eps = get_count(cfg, "n_eps", 7), n_v = get_count(cfg, "n_v", 3);
  resolved["n_eps"] = n_eps;
  resolved["n_v"] = n_v;
  const GarchChain chain = build_chain(spec, n_eps, n_v);
  Json doc = envelope("garch-discretize", resolved);
  const Json body = io::to_json(chain);
  for (const auto& [k, v] : body.items()) doc[k] = v;
  write_json(out_dir / "chain.json", doc);
  out << "states " << chain.P.size() << " written " << (out_dir / "chain.json").string() << "\n";
  return kOk;
}

int cmd_garch_estimate(const Json& cfg, const fs::path& out_dir, std::ostream& out) {
  Json resolved = cfg;
  const fs::path path = existing_file(cfg, "returns_csv");
  const bool header = cfg.value("header", false);
  resolved["header"] = header;
  const auto returns = io::read_returns_csv(path, header);
  const GarchEstimate est = estimate_garch(returns);

  Json doc = envelope("garch-estimate", resolved);
  doc["result"] = {{"spec", io::to_json(est.spec)},
                   {"log_likelihood", est.log_likelihood},
                   {"sample_variance", est.sample_variance},
                   {"observations", returns.size()},
                   {"iterations", est.iterations},
                   {"converged", est.converged},
                   {"boundary", est.boundary}};
  write_json(out_dir / "garch_spec.json", doc);
  out << doc["result"].dump(2) << "\n";
  if (!est.converged && !est.boundary) throw NumericalError("GARCH likelihood maximization did not converge");
  return kOk;
}

int cmd_figures(const Json& cfg, const fs::path& out_dir, int threads, std::ostream& out) {
  const FigureSettings s = figure_settings_from_json(cfg.value("settings", Json::object()));
  Json resolved = cfg;
  resolved["settings"] = to_json(s);

  const FigureTables t = build_figures(s, threads);
  io::write_table_csv(out_dir / "fig1_regimes.csv", t.fig1_regimes);
  io::write_table_csv(out_dir / "fig2_consumption.csv", t.fig2_consumption);
  io::write_table_csv(out_dir / "fig3_consumption_rate.csv", t.fig3_consumption_rate);
  io::write_table_csv(out_dir / "fig4_saving_rate.csv", t.fig4_saving_rate);

  Json runs = Json::array();
  for (const auto& r : t.runs) {
    Json cls = Json::array();
    for (auto c : r.ampc.classification) cls.push_back(std::string(to_string(c)));
    runs.push_back({{"gamma", r.gamma},
                    {"c_bar", r.ampc.c_bar},
                    {"classification", cls},
                    {"r_PD", r.ampc.r_PD},
                    {"policy_iterations", r.policy.iterations},
                    {"final_rho", r.policy.rho_trace.empty() ? 0.0 : r.policy.rho_trace.back()},
                    {"slope_tail", r.policy.slope_tail}});
  }
  Json doc = envelope("figures", resolved);
  doc["notes"] = {"Regime map axis ranges are configurable defaults chosen to bracket the regime boundary.",
                  "Variance states at eps = 0 (middle innovation point); state z = m * n_eps + n."};
  doc["runs"] = runs;
  write_json(out_dir / "figures.json", doc);
  out << "wrote 4 tables to " << out_dir.string() << "\n";
  return kOk;
}

void emit_error(std::ostream& err, const char* kind, int code, const std::string& message) {
  err << Json{{"error", {{"kind", kind}, {"exit_code", code}, {"message", message}}}}.dump() << "\n";
}

}  // namespace

FigureSettings figure_settings_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("'settings' must be an object");
  FigureSettings s;
  if (j.contains("garch")) s.garch = io::garch_spec_from_json(j["garch"]);
  s.n_eps = get_count(j, "n_eps", s.n_eps);
  s.n_v = get_count(j, "n_v", s.n_v);
  s.beta = get_positive(j, "beta", s.beta);
  s.growth = get_number(j, "growth", s.growth);
  if (j.contains("gammas")) {
    s.gammas.clear();
    for (const auto& g : j["gammas"]) {
      if (!g.is_number() || !(g.get<double>() > 0.0)) throw InputError("'gammas' must be positive numbers");
      s.gammas.push_back(g.get<double>());
    }
  }
  s.a_min = get_positive(j, "a_min", s.a_min);
  s.a_max = get_positive(j, "a_max", s.a_max);
  s.grid_median = get_positive(j, "grid_median", s.grid_median);
  s.grid_points = get_count(j, "grid_points", s.grid_points);
  s.tol = get_positive(j, "tol", s.tol);
  s.rel_tol = get_positive(j, "rel_tol", s.rel_tol);
  s.max_iter = static_cast<int>(get_count(j, "max_iter", static_cast<std::size_t>(s.max_iter)));
  s.fig1_gamma_lo = get_positive(j, "fig1_gamma_lo", s.fig1_gamma_lo);
  s.fig1_gamma_hi = get_positive(j, "fig1_gamma_hi", s.fig1_gamma_hi);
  s.fig1_gamma_points = get_count(j, "fig1_gamma_points", s.fig1_gamma_points);
  s.fig1_rate_lo = get_number(j, "fig1_rate_lo", s.fig1_rate_lo);
  s.fig1_rate_hi = get_number(j, "fig1_rate_hi", s.fig1_rate_hi);
  s.fig1_rate_points = get_count(j, "fig1_rate_points", s.fig1_rate_points);
  s.level_points = get_count(j, "level_points", s.level_points);
  s.rate_a_lo = get_positive(j, "rate_a_lo", s.rate_a_lo);
  s.rate_a_hi = get_positive(j, "rate_a_hi", s.rate_a_hi);
  s.rate_points = get_count(j, "rate_points", s.rate_points);
  if (s.fig1_gamma_points == 0 || s.fig1_rate_points == 0 || s.level_points == 0 || s.rate_points == 0)
    throw InputError("figure point counts must be positive");
  return s;
}

Json to_json(const FigureSettings& s) {
  return {{"garch", io::to_json(s.garch)},
          {"n_eps", s.n_eps},
          {"n_v", s.n_v},
          {"beta", s.beta},
          {"growth", s.growth},
          {"gammas", s.gammas},
          {"a_min", s.a_min},
          {"a_max", s.a_max},
          {"grid_median", s.grid_median},
          {"grid_points", s.grid_points},
          {"tol", s.tol},
          {"rel_tol", s.rel_tol},
          {"max_iter", s.max_iter},
          {"fig1_gamma_lo", s.fig1_gamma_lo},
          {"fig1_gamma_hi", s.fig1_gamma_hi},
          {"fig1_gamma_points", s.fig1_gamma_points},
          {"fig1_rate_lo", s.fig1_rate_lo},
          {"fig1_rate_hi", s.fig1_rate_hi},
          {"fig1_rate_points", s.fig1_rate_points},
          {"level_points", s.level_points},
          {"rate_a_lo", s.rate_a_lo},
          {"rate_a_hi", s.rate_a_hi},
          {"rate_points", s.rate_points}};
}

int run_config(const Json& config, const fs::path& out_dir, int threads, std::ostream& out) {
  if (!config.is_object() || !config.contains("command") || !config["command"].is_string())
    throw InputError("config must be an object with a string 'command'");
  if (threads < 1) throw InputError("--threads must be at least 1");
  const std::string cmd = config["command"].get<std::string>();
  fs::create_directories(out_dir);
  if (cmd == "check") return cmd_check(config, out_dir, out);
  if (cmd == "ampc") return cmd_ampc(config, out_dir, out);
  if (cmd == "solve") return cmd_solve(config, out_dir, threads, out);
  if (cmd == "garch-discretize") return cmd_garch_discretize(config, out_dir, out);
  if (cmd == "garch-estimate") return cmd_garch_estimate(config, out_dir, out);
  if (cmd == "figures") return cmd_figures(config, out_dir, threads, out);
  throw InputError("unknown command '" + cmd + "'");
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Income fluctuation problem solver: asymptotic MPCs, policy iteration, GARCH returns"};
  app.set_version_flag("--version", io::version());
  std::string config_path;
  std::string out_dir = ".";
  int threads = 1;
  app.add_option("--config", config_path, "JSON run config")->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads, "worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
  app.require_subcommand(0, 1);
  app.fallthrough();
  for (const char* c : kCommands) app.add_subcommand(c, std::string("run the ") + c + " command")->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kOk;
    return kConfigError;
  }

  try {
    Json config = io::read_json_file(config_path);
    if (!app.get_subcommands().empty()) {
      const std::string sub = app.get_subcommands().front()->get_name();
      if (!config.is_object()) throw InputError("config must be a JSON object");
      if (config.contains("command") && config["command"] != sub)
        throw InputError("config command '" + config["command"].get<std::string>() + "' does not match subcommand '" +
                         sub + "'");
      config["command"] = sub;
    }
    return run_config(config, out_dir, threads, out);
  } catch (const InputError& e) {
    emit_error(err, "config", kConfigError, e.what());
    return kConfigError;
  } catch (const Json::exception& e) {
    emit_error(err, "config", kConfigError, e.what());
    return kConfigError;
  } catch (const fs::filesystem_error& e) {
    emit_error(err, "config", kConfigError, e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    emit_error(err, "numerical", kNumericalFailure, e.what());
    return kNumericalFailure;
  }
}

}  // namespace ifp::cli
