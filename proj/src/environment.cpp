#include "ifp/environment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ifp/error.hpp"
#include "ifp/utility.hpp"

namespace ifp {

double DiscreteSupport::mean() const {
  double s = 0.0;
  for (const auto& p : points) s += p.value * p.prob;
  return s;
}

void DiscreteSupport::validate(const char* what) const {
  if (points.empty()) throw InputError(std::string(what) + ": empty support");
  double total = 0.0;
  for (const auto& p : points) {
    if (!std::isfinite(p.value) || p.value < 0.0)
      throw InputError(std::string(what) + ": support values must be finite and >= 0");
    if (!std::isfinite(p.prob) || p.prob < 0.0)
      throw InputError(std::string(what) + ": probabilities must be finite and >= 0");
    total += p.prob;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg.precision(17);
    msg << what << ": probabilities sum to " << total;
    throw InputError(msg.str());
  }
}

MarkovEnvironment::MarkovEnvironment(TransitionMatrix p, std::vector<StateShocks> shocks, double gamma)
    : p_(std::move(p)), shocks_(std::move(shocks)), gamma_(gamma) {
  if (shocks_.size() != p_.size()) throw InputError("environment: one shock set per state is required");
  if (!(gamma_ > 0.0) || !std::isfinite(gamma_)) throw InputError("environment: gamma must be positive");
  for (const auto& s : shocks_) {
    s.beta.validate("beta");
    s.r.validate("R");
    s.y.validate("Y");
  }
}

double MarkovEnvironment::min_positive_return() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& s : shocks_)
    for (const auto& p : s.r.points)
      if (p.value > 0.0 && p.prob > 0.0) m = std::min(m, p.value);
  return m;
}

MarkovEnvironment MarkovEnvironment::with_gamma(double gamma) const {
  return MarkovEnvironment(p_, shocks_, gamma);
}

MarkovEnvironment MarkovEnvironment::with_shocks(std::vector<StateShocks> shocks) const {
  return MarkovEnvironment(p_, std::move(shocks), gamma_);
}

namespace {

// E beta * E g(R) by independence of beta and R within a state.
double beta_times_r_moment(const StateShocks& s, double r_power) {
  const double eb = s.beta.mean();
  if (eb == 0.0) return 0.0;
  if (r_power == 0.0) {
    bool any_zero = false;
    for (const auto& p : s.r.points) any_zero = any_zero || (p.value == 0.0 && p.prob > 0.0);
    if (!any_zero) return eb;
  }
  double er = 0.0;
  for (const auto& p : s.r.points) {
    if (p.value == 0.0 || p.prob == 0.0) continue;  // beta R^(1-gamma) = 0 when R = 0
    er += p.prob * std::pow(p.value, r_power);
  }
  return eb * er;
}

}  // namespace

std::vector<double> moment_vector(const MarkovEnvironment& env, Moment moment) {
  std::vector<double> d(env.num_states());
  for (std::size_t z = 0; z < d.size(); ++z) {
    const StateShocks& s = env.shocks(z);
    switch (moment) {
      case Moment::Beta:
        d[z] = s.beta.mean();
        break;
      case Moment::BetaR:
        d[z] = beta_times_r_moment(s, 1.0);
        break;
      case Moment::BetaR1mGamma:
        d[z] = beta_times_r_moment(s, 1.0 - env.gamma());
        break;
      case Moment::Income:
        d[z] = s.y.mean();
        break;
    }
    if (!std::isfinite(d[z])) throw InputError("environment moment is not finite");
  }
  return d;
}

SquareMatrix moment_diagonal(const MarkovEnvironment& env, Moment moment) {
  const auto d = moment_vector(env, moment);
  return SquareMatrix::diagonal(d);
}

SquareMatrix moment_kernel(const MarkovEnvironment& env, Moment moment) {
  const auto d = moment_vector(env, moment);
  return times_diagonal(env.transition(), d);
}

ConditionReport check_conditions(const MarkovEnvironment& env) {
  ConditionReport rep;
  rep.r_PDbeta = spectral_radius(moment_kernel(env, Moment::Beta));
  rep.r_PDbetaR = spectral_radius(moment_kernel(env, Moment::BetaR));
  rep.r_PDbetaR1mg = spectral_radius(moment_kernel(env, Moment::BetaR1mGamma));
  rep.assumption2_ok = rep.r_PDbeta < 1.0 && rep.r_PDbetaR < 1.0;

  rep.brra_condition_value = brra_condition_value(env, env.gamma(), env.gamma());

  if (rep.r_PDbeta >= 1.0) rep.notes.emplace_back("r(P D_beta) >= 1: discounting condition fails");
  if (rep.r_PDbetaR >= 1.0) rep.notes.emplace_back("r(P D_betaR) >= 1: impatience condition fails");
  if (rep.r_PDbetaR1mg >= 1.0)
    rep.notes.emplace_back("r(P D_betaR^(1-gamma)) >= 1: some asymptotic MPCs are zero");
  else
    rep.notes.emplace_back("r(P D_betaR^(1-gamma)) < 1: asymptotic MPCs are positive");
  for (std::size_t z = 0; z < env.num_states(); ++z) {
    const auto& s = env.shocks(z);
    bool zero_income = false;
    for (const auto& p : s.y.points)
      if (p.value == 0.0 && p.prob > 0.0) zero_income = true;
    if (zero_income) {
      std::ostringstream msg;
      msg << "state " << z << ": Y = 0 with positive probability, E u'(Y) is infinite";
      rep.notes.push_back(msg.str());
    }
  }
  return rep;
}

double brra_condition_value(const MarkovEnvironment& env, double gamma_lo, double gamma_hi) {
  std::vector<double> d(env.num_states());
  for (std::size_t z = 0; z < d.size(); ++z) {
    const StateShocks& s = env.shocks(z);
    const double eb = s.beta.mean();
    double er = 0.0;
    for (const auto& p : s.r.points) {
      if (p.value == 0.0 || p.prob == 0.0) continue;
      er += p.prob * p.value * std::max(std::pow(p.value, -gamma_lo), std::pow(p.value, -gamma_hi));
    }
    d[z] = eb == 0.0 ? 0.0 : eb * er;
  }
  const auto next = env.transition().matrix() * std::span<const double>(d);
  return *std::max_element(next.begin(), next.end());
}

MarkovEnvironment detrend(const MarkovEnvironment& env, const Utility& u, double g) {
  if (!u.is_crra()) throw InputError("detrending requires CRRA utility");
  if (u.gamma() != env.gamma()) throw InputError("detrending: utility gamma differs from environment gamma");
  const double beta_factor = std::exp((1.0 - env.gamma()) * g);
  const double r_factor = std::exp(-g);
  std::vector<StateShocks> shocks = env.shocks();
  for (auto& s : shocks) {
    for (auto& p : s.beta.points) p.value *= beta_factor;
    for (auto& p : s.r.points) p.value *= r_factor;
  }
  return env.with_shocks(std::move(shocks));
}

MarkovEnvironment detrend(const MarkovEnvironment& env, const Utility& u, double g, double detrended_income) {
  MarkovEnvironment out = detrend(env, u, g);
  std::vector<StateShocks> shocks = out.shocks();
  for (auto& s : shocks) s.y = DiscreteSupport::constant(detrended_income);
  return out.with_shocks(std::move(shocks));
}

}  // namespace ifp
