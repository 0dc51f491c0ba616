#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ifp/ampc.hpp"
#include "ifp/environment.hpp"
#include "ifp/garch.hpp"
#include "ifp/policy.hpp"

namespace ifp {

/// Change in net worth over total income,
/// 1 - (c/a) / ((R' - 1)(1 - c/a) + Y'/a). Empty when total income is zero.
std::optional<double> saving_rate(double a, double c, double r_next, double y_next);

/// Saving rate of an infinitely wealthy agent, 1 - c_bar / ((R - 1)(1 - c_bar)).
/// c_bar = 0 gives 1; c_bar = 1 or (R = 1, c_bar interior) is undefined.
std::optional<double> asymptotic_saving_rate(double c_bar, double r_hat);

struct BewleyVerdict {
  double c_bar;
  double saving_rate;
  /// (beta R)^(1/gamma); below one is equivalent to a negative asymptotic saving rate.
  double condition_value;
  bool negative;
};

/// Constant beta and R > 1 with beta R < 1.
BewleyVerdict check_bewley_sign(double beta, double r, double gamma);

/// E R (1 - c_bar), the expected growth factor of wealth for an iid single-state environment.
double expected_growth_check(const MarkovEnvironment& env, double c_bar);

// ---------------------------------------------------------------------------
// Figure data

/// Regime of the asymptotic MPC in one (gamma, discount rate) cell of the calibrated chain.
struct RegimeCell {
  double gamma = 0.0;
  double discount_rate = 0.0;
  double r_PDbeta = 0.0;
  double r_PDbetaR = 0.0;
  double r_PDbetaR1mg = 0.0;
  /// "positive", "zero", or "no_solution" when r(P D_beta) or r(P D_betaR) >= 1.
  std::string regime;

  bool operator==(const RegimeCell&) const = default;
};

struct RegimeMapInput {
  GarchChain chain;
  double growth = 0.0;
  std::vector<double> gammas;
  std::vector<double> discount_rates;
};

/// beta = e^-discount_rate; the chain is detrended by `growth` at the cell's gamma.
RegimeCell regime_cell(const RegimeMapInput& in, double gamma, double discount_rate);

namespace kernels {
/// Cells ordered discount-rate-major: out[d * gammas.size() + g].
void regime_map_serial(const RegimeMapInput& in, std::span<RegimeCell> out);
void regime_map_parallel(const RegimeMapInput& in, std::span<RegimeCell> out, int threads);
}  // namespace kernels

std::vector<RegimeCell> regime_map(const RegimeMapInput& in, int threads);

/// Plain CSV table; every number is pre-formatted with 17 significant digits.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::string format_number(double v);

struct FigureSettings {
  GarchSpec garch{9.1297e-5, 0.8354, 0.1188, 6.8011e-3};
  std::size_t n_eps = 7;
  std::size_t n_v = 3;
  double beta = 0.9913;
  double growth = 1.6208e-3;
  std::vector<double> gammas{2.0, 4.0};

  double a_min = 1e-4;
  double a_max = 1e10;
  double grid_median = 1.0;
  std::size_t grid_points = 200;
  double tol = 1e-9;
  double rel_tol = 1e-10;
  int max_iter = 10000;

  double fig1_gamma_lo = 1.0;
  double fig1_gamma_hi = 6.0;
  std::size_t fig1_gamma_points = 61;
  double fig1_rate_lo = 0.005 / 12.0;
  double fig1_rate_hi = 0.3 / 12.0;
  std::size_t fig1_rate_points = 61;

  std::size_t level_points = 200;  ///< per level panel, a in (0, 100] and (0, 1e10]
  double rate_a_lo = 1e-2;         ///< consumption- and saving-rate panels, log grid
  double rate_a_hi = 1e10;
  std::size_t rate_points = 241;
};

/// Solved model for one gamma.
struct ModelRun {
  double gamma;
  MarkovEnvironment env;  ///< detrended
  AmpcSolution ampc;
  PolicySolution policy;
};

struct FigureTables {
  Table fig1_regimes;
  Table fig2_consumption;
  Table fig3_consumption_rate;
  Table fig4_saving_rate;
  std::vector<ModelRun> runs;
};

/// Detrended calibrated environment at the given gamma.
MarkovEnvironment calibrated_environment(const FigureSettings& s, const GarchChain& chain, double gamma);

/// Tables for one solved model; appended to the per-figure tables.
void emit_model_figures(const FigureSettings& s, const GarchChain& chain, const ModelRun& run, FigureTables& out);

/// Full pipeline: chain, regime map, and one policy solve per gamma.
FigureTables build_figures(const FigureSettings& s, int threads);

}  // namespace ifp
