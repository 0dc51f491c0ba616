#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ifp/environment.hpp"
#include "ifp/markov.hpp"

namespace ifp {

/// log R_t = mu - v_t / 2 + eps_t,  eps_t = sqrt(v_t) zeta_t,  v_t = omega + alpha eps_{t-1}^2 + rho v_{t-1}.
struct GarchSpec {
  double omega = 0.0;
  double alpha = 0.0;
  double rho = 0.0;
  double mu = 0.0;

  void validate() const;
  double unconditional_variance() const { return omega / (1.0 - alpha - rho); }
};

/// N-point grid on [a, b] whose middle point (exactly, for odd N) is c. Requires a < c < (a+b)/2.
std::vector<double> exp_grid(double a, double b, double c, std::size_t n);

struct GarchGrids {
  std::vector<double> v_grid;
  std::vector<double> eps_grid;
  double k = 0.0;        ///< eps_max = k sqrt(omega / (1 - alpha - rho))
  double eps_max = 0.0;
};

GarchGrids build_grids(const GarchSpec& spec, std::size_t n_eps, std::size_t n_v);

/// Probabilities on a symmetric grid with mean 0 and variance v_hat: closed form for three
/// points, maximum-entropy tilt of a normal base otherwise.
std::vector<double> innovation_probabilities(std::span<const double> eps_grid, double v_hat);

struct GarchRow {
  double v_hat = 0.0;
  std::size_t lower = 0;  ///< v_grid[lower] <= v_hat <= v_grid[lower + 1]
  double theta = 0.0;     ///< weight on v_grid[lower + 1]
  std::vector<double> innovation;
  std::vector<double> probs;  ///< over all N_v * N_eps states, variance-major
};

GarchRow transition_row(const GarchSpec& spec, const GarchGrids& grids, std::size_t m, std::size_t n);

struct GarchChain {
  GarchSpec spec;
  std::vector<double> v_grid;
  std::vector<double> eps_grid;
  TransitionMatrix P;
  /// Gross return exp(mu - v_m / 2 + eps_n) in state (m, n).
  std::vector<double> returns;
  std::vector<double> v_hat;

  std::size_t n_v() const { return v_grid.size(); }
  std::size_t n_eps() const { return eps_grid.size(); }
  std::size_t index(std::size_t m, std::size_t n) const { return m * eps_grid.size() + n; }
};

GarchChain build_chain(const GarchSpec& spec, std::size_t n_eps, std::size_t n_v);

/// Environment with constant beta and income per state and the chain's returns.
MarkovEnvironment chain_environment(const GarchChain& chain, double beta, double gamma, double income = 1.0);

struct GarchEstimate {
  GarchSpec spec;
  double log_likelihood = 0.0;
  double sample_variance = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Estimate sits at the edge of the admissible region (alpha or rho ~ 0, alpha + rho ~ 1).
  bool boundary = false;
};

/// Gaussian quasi-maximum likelihood for GARCH(1,1) on demeaned log excess returns.
/// mu is set to log of the sample mean of exp(returns).
GarchEstimate estimate_garch(std::span<const double> returns);

double garch_log_likelihood(std::span<const double> demeaned, double omega, double alpha, double rho,
                            double initial_variance);

}  // namespace ifp
