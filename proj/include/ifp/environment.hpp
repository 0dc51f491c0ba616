#pragma once

#include <string>
#include <vector>

#include "ifp/markov.hpp"

namespace ifp {

class Utility;

/// Finite discrete distribution: values with probabilities summing to one.
struct DiscreteSupport {
  struct Point {
    double value;
    double prob;
  };
  std::vector<Point> points;

  static DiscreteSupport constant(double v) { return {{{v, 1.0}}}; }
  double mean() const;
  /// Throws InputError if probabilities do not sum to one or values are negative.
  void validate(const char* what) const;
};

/// Conditional shock distributions of (beta, R, Y) in one exogenous state. The three
/// are mutually independent given the state.
struct StateShocks {
  DiscreteSupport beta;
  DiscreteSupport r;
  DiscreteSupport y;
};

/// Exogenous environment: Markov chain P, per-state shocks and asymptotic RRA gamma.
class MarkovEnvironment {
 public:
  MarkovEnvironment(TransitionMatrix p, std::vector<StateShocks> shocks, double gamma);

  std::size_t num_states() const { return p_.size(); }
  const TransitionMatrix& transition() const { return p_; }
  const std::vector<StateShocks>& shocks() const { return shocks_; }
  const StateShocks& shocks(std::size_t z) const { return shocks_[z]; }
  double gamma() const { return gamma_; }

  /// Smallest positive return over all supports.
  double min_positive_return() const;

  MarkovEnvironment with_gamma(double gamma) const;
  MarkovEnvironment with_shocks(std::vector<StateShocks> shocks) const;

 private:
  TransitionMatrix p_;
  std::vector<StateShocks> shocks_;
  double gamma_;
};

enum class Moment {
  Beta,           ///< E_z beta
  BetaR,          ///< E_z beta R
  BetaR1mGamma,   ///< E_z beta R^(1-gamma), with beta R^(1-gamma) = 0 when beta = 0 or R = 0
  Income,         ///< E_z Y
};

/// Diagonal entries D_X(z,z) = E_z X.
std::vector<double> moment_vector(const MarkovEnvironment& env, Moment moment);
SquareMatrix moment_diagonal(const MarkovEnvironment& env, Moment moment);
/// K = P D_X.
SquareMatrix moment_kernel(const MarkovEnvironment& env, Moment moment);

struct ConditionReport {
  double r_PDbeta = 0.0;
  double r_PDbetaR = 0.0;
  double r_PDbetaR1mg = 0.0;
  bool assumption2_ok = false;
  /// max_z E_z beta R max{R^-gamma_lo, R^-gamma_hi}; gamma_lo = gamma_hi = gamma here.
  double brra_condition_value = 0.0;
  std::vector<std::string> notes;
};

ConditionReport check_conditions(const MarkovEnvironment& env);

/// max_z E_z beta' R' max{R'^-gamma_lo, R'^-gamma_hi} over next-period shocks. Values
/// below one guarantee the asymptotic MPC limit for RRA bounded in [gamma_lo, gamma_hi].
double brra_condition_value(const MarkovEnvironment& env, double gamma_lo, double gamma_hi);

/// Growth-detrended environment for CRRA utility: R -> R e^-g, beta -> beta e^((1-gamma) g).
/// Income supports are replaced by `detrended_income` when given (Y_t = e^(gt) gives 1).
MarkovEnvironment detrend(const MarkovEnvironment& env, const Utility& u, double g);
MarkovEnvironment detrend(const MarkovEnvironment& env, const Utility& u, double g,
                          double detrended_income);

}  // namespace ifp
