#include "ifp/ampc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ifp/error.hpp"

namespace ifp {

namespace {

constexpr double kRadiusTie = 1e-10;

// log(1 + e^t) without overflow.
double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

// Plain-double F on the finite sub-problem; xs are all finite.
void apply_F_finite(const SquareMatrix& k, double gamma, const std::vector<double>& x, std::vector<double>& out) {
  const std::size_t n = k.size();
  for (std::size_t z = 0; z < n; ++z) {
    double s = 0.0;
    for (std::size_t w = 0; w < n; ++w) s += k(z, w) * x[w];
    out[z] = s == 0.0 ? 1.0 : std::exp(gamma * softplus(std::log(s) / gamma));
  }
}

double max_relative_change(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]) / std::max(a[i], b[i]));
  return d;
}

// In y = x^(1/gamma) the fixed-point equation reads y = 1 + N(y), N(y) = (K y^gamma)^(1/gamma).
// N is 1-homogeneous, so N(y) = J(y) y and the Newton step is y+ = (I - J(y))^-1 1.
double y_residual(const SquareMatrix& k, double gamma, const std::vector<double>& y) {
  const std::size_t n = y.size();
  std::vector<double> yg(n);
  for (std::size_t z = 0; z < n; ++z) yg[z] = std::pow(y[z], gamma);
  const auto s = k * std::span<const double>(yg);
  double r = 0.0;
  for (std::size_t z = 0; z < n; ++z) r = std::max(r, std::abs(1.0 + std::pow(s[z], 1.0 / gamma) - y[z]) / y[z]);
  return r;
}

double relative_residual(const SquareMatrix& k, double gamma, const std::vector<double>& x) {
  std::vector<double> y(x.size());
  for (std::size_t z = 0; z < x.size(); ++z) y[z] = std::pow(x[z], 1.0 / gamma);
  return y_residual(k, gamma, y);
}

// Returns false if no Newton step improved the residual; x is left untouched then.
bool newton_polish(const SquareMatrix& k, double gamma, std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> y(n), yg(n);
  for (std::size_t z = 0; z < n; ++z) y[z] = std::pow(x[z], 1.0 / gamma);
  double res = y_residual(k, gamma, y);
  const std::vector<double> ones(n, 1.0);
  bool improved = false;
  for (int step = 0; step < 60 && res > 0.0; ++step) {
    for (std::size_t z = 0; z < n; ++z) yg[z] = std::pow(y[z], gamma);
    const auto s = k * std::span<const double>(yg);
    SquareMatrix jac(n);
    for (std::size_t z = 0; z < n; ++z) {
      if (s[z] == 0.0) continue;
      const double lead = std::pow(s[z], 1.0 / gamma - 1.0);
      for (std::size_t w = 0; w < n; ++w) jac(z, w) = lead * k(z, w) * std::pow(y[w], gamma - 1.0);
    }
    std::vector<double> next;
    try {
      next = solve_linear_neumann(jac, ones);
    } catch (const Error&) {
      break;
    }
    if (!std::all_of(next.begin(), next.end(), [](double v) { return std::isfinite(v) && v >= 1.0; })) break;
    const double next_res = y_residual(k, gamma, next);
    if (!(next_res < res)) break;
    y = std::move(next);
    res = next_res;
    improved = true;
  }
  if (improved)
    for (std::size_t z = 0; z < n; ++z) x[z] = std::pow(y[z], gamma);
  return improved;
}

int iterate_to_fixed_point(const SquareMatrix& k, double gamma, std::vector<double>& x, const FixedPointOptions& opt) {
  // Monotone iteration, with a Newton polish once it has converged or whenever the
  // contraction is slow enough that the polish already lands on the fixed point.
  constexpr double kPolished = 1e-14;
  std::vector<double> next(x.size());
  for (int it = 1; it <= opt.max_iter; ++it) {
    apply_F_finite(k, gamma, x, next);
    const double change = max_relative_change(x, next);
    x.swap(next);
    for (double v : x)
      if (!std::isfinite(v)) throw NumericalError("fixed-point iteration overflowed on a finite block");
    if (change < opt.tol) {
      newton_polish(k, gamma, x);
      return it;
    }
    if (it % 512 == 0) {
      std::vector<double> trial = x;
      if (newton_polish(k, gamma, trial) && relative_residual(k, gamma, trial) < kPolished) {
        x = trial;
        return it;
      }
    }
  }
  std::ostringstream msg;
  msg << "fixed-point iteration did not converge in " << opt.max_iter << " iterations";
  throw NumericalError(msg.str());
}

}  // namespace

double Extended::value() const {
  if (infinite_) throw InputError("Extended::value() on infinity");
  return value_;
}

std::string_view to_string(MpcClass c) {
  switch (c) {
    case MpcClass::One:
      return "ONE";
    case MpcClass::Interior:
      return "INTERIOR";
    case MpcClass::Zero:
      return "ZERO";
  }
  return "?";
}

double phi(double t, double gamma) { return std::pow(1.0 + std::pow(t, 1.0 / gamma), gamma); }

std::vector<Extended> apply_F(const SquareMatrix& k, double gamma, const std::vector<Extended>& x) {
  const std::size_t n = k.size();
  if (x.size() != n) throw InputError("apply_F: dimension mismatch");
  std::vector<Extended> out(n);
  for (std::size_t z = 0; z < n; ++z) {
    bool infinite = false;
    double max_log = -std::numeric_limits<double>::infinity();
    for (std::size_t w = 0; w < n; ++w) {
      if (k(z, w) <= 0.0) continue;
      if (x[w].is_infinite()) {
        infinite = true;
        break;
      }
      max_log = std::max(max_log, std::log(k(z, w)) + std::log(x[w].value()));
    }
    if (infinite) {
      out[z] = Extended::infinity();
      continue;
    }
    if (max_log == -std::numeric_limits<double>::infinity()) {
      out[z] = Extended(1.0);
      continue;
    }
    double acc = 0.0;
    for (std::size_t w = 0; w < n; ++w) {
      if (k(z, w) <= 0.0) continue;
      acc += std::exp(std::log(k(z, w)) + std::log(x[w].value()) - max_log);
    }
    const double log_s = max_log + std::log(acc);
    const double log_fx = gamma * softplus(log_s / gamma);
    out[z] = log_fx >= std::log(std::numeric_limits<double>::max()) ? Extended::infinity()
                                                                    : Extended(std::exp(log_fx));
  }
  return out;
}

std::vector<Extended> apply_F(const MarkovEnvironment& env, const std::vector<Extended>& x) {
  return apply_F(moment_kernel(env, Moment::BetaR1mGamma), env.gamma(), x);
}

std::vector<MpcClass> classify_states(const SquareMatrix& k) {
  const BlockDecomposition blocks = decompose_blocks(k);
  std::vector<MpcClass> out(k.size(), MpcClass::Interior);
  for (std::size_t z = 0; z < k.size(); ++z) {
    bool row_zero = true;
    for (double v : k.row(z))
      if (v > 0.0) row_zero = false;
    if (row_zero) {
      out[z] = MpcClass::One;
      continue;
    }
    for (std::size_t j = 0; j < blocks.num_classes(); ++j) {
      if (blocks.reach[z][j] && blocks.class_spectral_radii[j] >= 1.0 - kRadiusTie) {
        out[z] = MpcClass::Zero;
        break;
      }
    }
  }
  return out;
}

std::vector<MpcClass> classify_states(const MarkovEnvironment& env) {
  return classify_states(moment_kernel(env, Moment::BetaR1mGamma));
}

AmpcSolution solve_fixed_point(const MarkovEnvironment& env, const FixedPointOptions& opt) {
  return solve_fixed_point(env, env.gamma(), env.gamma(), opt);
}

AmpcSolution solve_fixed_point(const MarkovEnvironment& env, double rra_lo, double rra_hi,
                               const FixedPointOptions& opt) {
  const double gamma = env.gamma();
  const SquareMatrix k = moment_kernel(env, Moment::BetaR1mGamma);
  const std::size_t n = k.size();

  AmpcSolution sol;
  sol.r_PD = spectral_radius(k);
  sol.classification = classify_states(k);

  std::vector<std::size_t> active;
  for (std::size_t z = 0; z < n; ++z)
    if (sol.classification[z] != MpcClass::Zero) active.push_back(z);

  std::vector<double> lower(active.size(), 1.0);
  if (!active.empty()) {
    // Non-ZERO states only load on non-ZERO states, so the restriction is exact.
    const SquareMatrix ks = k.principal(active);
    sol.iterations = iterate_to_fixed_point(ks, gamma, lower, opt);

    const double r_sub = spectral_radius(ks);
    double target_a = 1.0;
    if (gamma > 1.0) target_a = r_sub > 0.0 ? std::min(2.0, 1.0 + 0.5 * (1.0 / r_sub - 1.0)) : 2.0;
    const AffineBound ab = affine_bound_params(gamma, target_a);
    std::vector<double> rhs(active.size(), ab.b);
    std::vector<double> upper = solve_linear_neumann(ks.scaled(ab.a), rhs);
    for (double& v : upper) v = std::max(v, 1.0);
    sol.upper_iterations = iterate_to_fixed_point(ks, gamma, upper, opt);
    sol.seed_gap = max_relative_change(lower, upper);
    if (sol.seed_gap > opt.seed_agreement) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "fixed point not unique: lower and upper seeds differ by " << sol.seed_gap;
      throw NumericalError(msg.str());
    }
  }
  sol.converged = true;

  sol.x_star.assign(n, Extended::infinity());
  sol.c_bar.assign(n, 0.0);
  for (std::size_t i = 0; i < active.size(); ++i) {
    const std::size_t z = active[i];
    if (sol.classification[z] == MpcClass::One) {
      sol.x_star[z] = Extended(1.0);
      sol.c_bar[z] = 1.0;
    } else {
      sol.x_star[z] = Extended(lower[i]);
      sol.c_bar[z] = std::pow(lower[i], -1.0 / gamma);
    }
  }

  const bool crra = rra_lo == gamma && rra_hi == gamma;
  bool irreducible = decompose_blocks(k).num_classes() == 1;
  sol.limit_guaranteed = (crra && sol.r_PD < 1.0) || (irreducible && sol.r_PD >= 1.0 - kRadiusTie) ||
                         brra_condition_value(env, rra_lo, rra_hi) < 1.0;
  return sol;
}

std::vector<double> closed_form_gamma1(const MarkovEnvironment& env) {
  if (env.gamma() != 1.0) throw InputError("closed_form_gamma1 requires gamma = 1");
  const SquareMatrix k = moment_kernel(env, Moment::Beta);
  if (spectral_radius(k) >= 1.0) throw InputError("closed_form_gamma1 requires r(P D_beta) < 1");
  std::vector<double> ones(env.num_states(), 1.0);
  std::vector<double> x = solve_linear_neumann(k, ones);
  for (double& v : x) v = 1.0 / v;
  return x;
}

double closed_form_lognormal(double gamma, double discount_rate, double mu, double sigma) {
  if (!(gamma > 0.0)) throw InputError("closed_form_lognormal requires gamma > 0");
  if (!(sigma >= 0.0)) throw InputError("closed_form_lognormal requires sigma >= 0");
  if (!(discount_rate > mu)) throw InputError("closed_form_lognormal requires discount rate > mu");
  const double drift = mu - 0.5 * gamma * sigma * sigma;
  if (!(discount_rate > (1.0 - gamma) * drift)) return 0.0;
  const double psi = 1.0 / gamma;
  return 1.0 - std::exp(-psi * discount_rate - (1.0 - psi) * drift);
}

AffineBound affine_bound_params(double gamma, double target_a) {
  if (!(gamma > 0.0)) throw InputError("affine_bound_params requires gamma > 0");
  if (gamma <= 1.0) return {1.0, 1.0};
  if (!(target_a > 1.0))
    throw InputError("affine_bound_params: phi'(t) > 1 for gamma > 1, so target_a must exceed 1");
  // phi'(u) = (u^(-1/gamma) + 1)^(gamma - 1) = target_a.
  const double u = std::pow(std::pow(target_a, 1.0 / (gamma - 1.0)) - 1.0, -gamma);
  const double b = std::max(0.0, phi(u, gamma) - target_a * u);
  return {target_a, b};
}

}  // namespace ifp
