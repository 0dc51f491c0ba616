#include "ifp/analysis.hpp"

#include <cmath>
#include <cstdio>

#include "ifp/error.hpp"

namespace ifp {

std::optional<double> saving_rate(double a, double c, double r_next, double y_next) {
  if (!(a > 0.0) || !(c > 0.0) || c > a) throw InputError("saving_rate requires a > 0 and 0 < c <= a");
  if (!(y_next >= 0.0)) throw InputError("saving_rate requires Y' >= 0");
  const double rate = c / a;
  const double income_over_a = (r_next - 1.0) * (1.0 - rate) + y_next / a;
  if (income_over_a == 0.0) return std::nullopt;
  return 1.0 - rate / income_over_a;
}

std::optional<double> asymptotic_saving_rate(double c_bar, double r_hat) {
  if (!(c_bar >= 0.0 && c_bar <= 1.0)) throw InputError("asymptotic_saving_rate requires c_bar in [0, 1]");
  if (c_bar == 0.0) return 1.0;
  if (c_bar == 1.0 || r_hat == 1.0) return std::nullopt;
  return 1.0 - c_bar / ((r_hat - 1.0) * (1.0 - c_bar));
}

BewleyVerdict check_bewley_sign(double beta, double r, double gamma) {
  if (!(gamma > 0.0) || !(r > 1.0) || !(beta > 0.0) || !(beta * r < 1.0))
    throw InputError("Bewley check requires beta > 0, R > 1, beta R < 1 and gamma > 0");
  BewleyVerdict v{};
  const double b = beta * std::pow(r, 1.0 - gamma);
  v.c_bar = 1.0 - std::pow(b, 1.0 / gamma);
  v.saving_rate = *asymptotic_saving_rate(v.c_bar, r);
  v.condition_value = std::pow(beta * r, 1.0 / gamma);
  v.negative = v.saving_rate < 0.0;
  return v;
}

double expected_growth_check(const MarkovEnvironment& env, double c_bar) {
  if (env.num_states() != 1) throw InputError("expected_growth_check requires a single-state (iid) environment");
  if (!(c_bar >= 0.0 && c_bar <= 1.0)) throw InputError("expected_growth_check requires c_bar in [0, 1]");
  return env.shocks(0).r.mean() * (1.0 - c_bar);
}

RegimeCell regime_cell(const RegimeMapInput& in, double gamma, double discount_rate) {
  const MarkovEnvironment raw = chain_environment(in.chain, std::exp(-discount_rate), gamma, 1.0);
  const MarkovEnvironment env = detrend(raw, Utility::crra(gamma), in.growth);
  RegimeCell cell;
  cell.gamma = gamma;
  cell.discount_rate = discount_rate;
  cell.r_PDbeta = spectral_radius(moment_kernel(env, Moment::Beta));
  cell.r_PDbetaR = spectral_radius(moment_kernel(env, Moment::BetaR));
  cell.r_PDbetaR1mg = spectral_radius(moment_kernel(env, Moment::BetaR1mGamma));
  if (cell.r_PDbeta >= 1.0 || cell.r_PDbetaR >= 1.0)
    cell.regime = "no_solution";
  else if (cell.r_PDbetaR1mg < 1.0)
    cell.regime = "positive";
  else
    cell.regime = "zero";
  return cell;
}

namespace kernels {

void regime_map_serial(const RegimeMapInput& in, std::span<RegimeCell> out) {
  const std::size_t ng = in.gammas.size();
  for (std::size_t d = 0; d < in.discount_rates.size(); ++d)
    for (std::size_t g = 0; g < ng; ++g) out[d * ng + g] = regime_cell(in, in.gammas[g], in.discount_rates[d]);
}

}  // namespace kernels

std::vector<RegimeCell> regime_map(const RegimeMapInput& in, int threads) {
  std::vector<RegimeCell> out(in.gammas.size() * in.discount_rates.size());
  if (threads <= 1)
    kernels::regime_map_serial(in, out);
  else
    kernels::regime_map_parallel(in, out, threads);
  return out;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return out;
}

std::vector<double> logspace(double lo, double hi, std::size_t n) {
  auto out = linspace(std::log10(lo), std::log10(hi), n);
  for (double& v : out) v = std::pow(10.0, v);
  return out;
}

const char* variance_label(std::size_t m, std::size_t n_v) {
  if (n_v == 3) return m == 0 ? "low" : (m == 1 ? "medium" : "high");
  return "";
}

}  // namespace

MarkovEnvironment calibrated_environment(const FigureSettings& s, const GarchChain& chain, double gamma) {
  const MarkovEnvironment raw = chain_environment(chain, s.beta, gamma, 1.0);
  return detrend(raw, Utility::crra(gamma), s.growth, 1.0);
}

void emit_model_figures(const FigureSettings& s, const GarchChain& chain, const ModelRun& run, FigureTables& out) {
  const std::size_t mid = chain.n_eps() / 2;
  const std::string g = format_number(run.gamma);

  for (std::size_t m = 0; m < chain.n_v(); ++m) {
    const std::size_t z = chain.index(m, mid);
    const std::string ms = std::to_string(m);
    const std::string label = variance_label(m, chain.n_v());
    const std::string v = format_number(chain.v_grid[m]);

    for (const auto& [panel, top] : {std::pair<const char*, double>{"a_to_100", 100.0}, {"a_to_1e10", 1e10}}) {
      for (std::size_t k = 1; k <= s.level_points; ++k) {
        const double a = top * static_cast<double>(k) / static_cast<double>(s.level_points);
        out.fig2_consumption.rows.push_back({g, panel, ms, label, v, format_number(a),
                                             format_number(interpolate_policy(run.policy, a, z))});
      }
    }

    // Undetrended next-period return at eps = 0 in the same variance state, and Y' = e^g.
    const double r_next = std::exp(chain.spec.mu - 0.5 * chain.v_grid[m]);
    const double y_next = std::exp(s.growth);
    const std::string cbar = format_number(run.ampc.c_bar[z]);
    const auto s_inf = asymptotic_saving_rate(run.ampc.c_bar[z], r_next);
    for (double a : logspace(s.rate_a_lo, s.rate_a_hi, s.rate_points)) {
      const double c = interpolate_policy(run.policy, a, z);
      out.fig3_consumption_rate.rows.push_back({g, ms, label, v, format_number(a), format_number(c / a), cbar});
      const auto sr = saving_rate(a, c, r_next, y_next);
      const bool constrained = c >= a * (1.0 - 1e-12);
      out.fig4_saving_rate.rows.push_back({g, ms, label, v, format_number(a), sr ? format_number(*sr) : "",
                                           constrained ? "constrained" : "interior",
                                           s_inf ? format_number(*s_inf) : ""});
    }
  }
}

FigureTables build_figures(const FigureSettings& s, int threads) {
  const GarchChain chain = build_chain(s.garch, s.n_eps, s.n_v);
  FigureTables out;

  RegimeMapInput rin{chain, s.growth, linspace(s.fig1_gamma_lo, s.fig1_gamma_hi, s.fig1_gamma_points),
                     linspace(s.fig1_rate_lo, s.fig1_rate_hi, s.fig1_rate_points)};
  out.fig1_regimes.header = {"gamma", "discount_rate", "r_PDbeta", "r_PDbetaR", "r_PDbetaR1mg", "regime"};
  for (const RegimeCell& c : regime_map(rin, threads))
    out.fig1_regimes.rows.push_back({format_number(c.gamma), format_number(c.discount_rate), format_number(c.r_PDbeta),
                                     format_number(c.r_PDbetaR), format_number(c.r_PDbetaR1mg), c.regime});

  out.fig2_consumption.header = {"gamma", "panel", "variance_state", "variance_label", "variance", "a", "c"};
  out.fig3_consumption_rate.header = {"gamma", "variance_state", "variance_label", "variance", "a", "c_over_a",
                                      "c_bar"};
  out.fig4_saving_rate.header = {"gamma",  "variance_state", "variance_label",         "variance",
                                 "a",      "saving_rate",    "regime", "asymptotic_saving_rate"};

  const AssetGrid grid = AssetGrid::exponential(s.a_min, s.a_max, s.grid_median, s.grid_points);
  for (double gamma : s.gammas) {
    MarkovEnvironment env = calibrated_environment(s, chain, gamma);
    AmpcSolution ampc = solve_fixed_point(env);
    PolicyOptions opt;
    opt.tol = s.tol;
    opt.rel_tol = s.rel_tol;
    opt.max_iter = s.max_iter;
    opt.threads = threads;
    PolicySolution policy = iterate_policy(env, Utility::crra(gamma), grid, opt);
    if (!policy.converged) throw NumericalError("policy iteration did not converge for gamma = " + format_number(gamma));
    out.runs.push_back(ModelRun{gamma, std::move(env), std::move(ampc), std::move(policy)});
    emit_model_figures(s, chain, out.runs.back(), out);
  }
  return out;
}

}  // namespace ifp
