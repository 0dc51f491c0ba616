#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <vector>

#include "ifp/error.hpp"
#include "ifp/garch.hpp"

namespace ifp {

double garch_log_likelihood(std::span<const double> e, double omega, double alpha, double rho,
                            double initial_variance) {
  double v = initial_variance;
  double ll = 0.0;
  const double log2pi = std::log(2.0 * std::numbers::pi);
  for (std::size_t t = 0; t < e.size(); ++t) {
    if (t > 0) v = omega + alpha * e[t - 1] * e[t - 1] + rho * v;
    ll -= 0.5 * (log2pi + std::log(v) + e[t] * e[t] / v);
  }
  return ll;
}

namespace {

struct Problem {
  std::vector<double> demeaned;
  double variance;
};

// Unconstrained (x0, x1, x2) -> omega = exp(x0), (alpha, rho, 1 - alpha - rho) = softmax(x1, x2, 0).
std::array<double, 3> to_params(double x0, double x1, double x2) {
  const double top = std::max({x1, x2, 0.0});
  const double e1 = std::exp(x1 - top), e2 = std::exp(x2 - top), e0 = std::exp(-top);
  const double s = e0 + e1 + e2;
  return {std::exp(x0), e1 / s, e2 / s};
}

double objective(const gsl_vector* x, void* data) {
  const auto* prob = static_cast<const Problem*>(data);
  const auto [omega, alpha, rho] = to_params(gsl_vector_get(x, 0), gsl_vector_get(x, 1), gsl_vector_get(x, 2));
  if (!(omega > 0.0) || !std::isfinite(omega) || !(alpha > 0.0) || !(rho > 0.0) || !(alpha + rho < 1.0))
    return std::numeric_limits<double>::max();
  const double ll = garch_log_likelihood(prob->demeaned, omega, alpha, rho, prob->variance);
  return std::isfinite(ll) ? -ll / static_cast<double>(prob->demeaned.size()) : std::numeric_limits<double>::max();
}

struct MinimizerDeleter {
  void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};
struct VectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};

struct Fit {
  std::array<double, 3> x;
  double value;
  int iterations;
  bool converged;
};

Fit nelder_mead(Problem& prob, std::array<double, 3> start) {
  gsl_multimin_function fn{&objective, 3, &prob};
  std::unique_ptr<gsl_vector, VectorDeleter> x(gsl_vector_alloc(3));
  std::unique_ptr<gsl_vector, VectorDeleter> step(gsl_vector_alloc(3));
  for (std::size_t i = 0; i < 3; ++i) {
    gsl_vector_set(x.get(), i, start[i]);
    gsl_vector_set(step.get(), i, 0.5);
  }
  std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> mini(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 3));
  gsl_multimin_fminimizer_set(mini.get(), &fn, x.get(), step.get());

  Fit fit{};
  int status = GSL_CONTINUE;
  double last_best = std::numeric_limits<double>::infinity();
  int stalled = 0;
  for (fit.iterations = 0; fit.iterations < 20000 && status == GSL_CONTINUE; ++fit.iterations) {
    if (gsl_multimin_fminimizer_iterate(mini.get()) != GSL_SUCCESS) break;
    status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(mini.get()), 1e-10);
    // Drifting along a flat direction towards the boundary of the parameter region.
    const double f = gsl_multimin_fminimizer_minimum(mini.get());
    if (f < last_best - 1e-13 * std::abs(f)) {
      last_best = f;
      stalled = 0;
    } else if (++stalled >= 500) {
      break;
    }
  }
  fit.converged = status == GSL_SUCCESS;
  const gsl_vector* best = gsl_multimin_fminimizer_x(mini.get());
  fit.x = {gsl_vector_get(best, 0), gsl_vector_get(best, 1), gsl_vector_get(best, 2)};
  fit.value = gsl_multimin_fminimizer_minimum(mini.get());
  return fit;
}

}  // namespace

GarchEstimate estimate_garch(std::span<const double> returns) {
  if (returns.size() < 100) throw InputError("GARCH estimation needs at least 100 observations");
  for (double r : returns)
    if (!std::isfinite(r)) throw InputError("GARCH estimation: non-finite return in series");

  Problem prob;
  double mean = 0.0, gross = 0.0;
  for (double r : returns) {
    mean += r;
    gross += std::exp(r);
  }
  mean /= static_cast<double>(returns.size());
  gross /= static_cast<double>(returns.size());
  prob.demeaned.reserve(returns.size());
  double var = 0.0, scale = 0.0;
  for (double r : returns) {
    prob.demeaned.push_back(r - mean);
    var += (r - mean) * (r - mean);
    scale += r * r;
  }
  var /= static_cast<double>(returns.size());
  scale /= static_cast<double>(returns.size());
  // Demeaning a constant series leaves roundoff of order eps^2 r^2.
  if (!(var > 1e-24 * scale)) throw InputError("GARCH estimation: series has zero variance");
  prob.variance = var;

  gsl_set_error_handler_off();
  // Several starting simplices; the likelihood surface is flat along alpha + rho.
  const std::array<std::array<double, 2>, 4> starts{{{0.05, 0.90}, {0.10, 0.80}, {0.30, 0.50}, {0.80, 0.10}}};
  Fit best{};
  best.value = std::numeric_limits<double>::infinity();
  for (const auto& [a0, r0] : starts) {
    const double omega0 = var * (1.0 - a0 - r0);
    const double rest = 1.0 - a0 - r0;
    Fit f = nelder_mead(prob, {std::log(omega0), std::log(a0 / rest), std::log(r0 / rest)});
    // Restart from the optimum to refresh a possibly collapsed simplex.
    Fit g = nelder_mead(prob, f.x);
    g.iterations += f.iterations;
    if (g.value < best.value) best = g;
  }

  GarchEstimate est;
  const auto [omega, alpha, rho] = to_params(best.x[0], best.x[1], best.x[2]);
  est.spec = GarchSpec{omega, alpha, rho, std::log(gross)};
  est.log_likelihood = garch_log_likelihood(prob.demeaned, omega, alpha, rho, var);
  est.sample_variance = var;
  est.iterations = best.iterations;
  est.converged = best.converged && std::isfinite(est.log_likelihood);
  est.boundary = alpha < 1e-3 || rho < 1e-3 || alpha + rho > 1.0 - 1e-4;
  return est;
}

}  // namespace ifp
