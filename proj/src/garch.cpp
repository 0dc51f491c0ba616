#include "ifp/garch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ifp/error.hpp"

namespace ifp {

void GarchSpec::validate() const {
  if (!(omega > 0.0) || !(alpha > 0.0) || !(rho > 0.0))
    throw InputError("GARCH(1,1) requires omega, alpha, rho > 0");
  if (!(alpha + rho < 1.0)) throw InputError("GARCH(1,1) requires alpha + rho < 1");
  if (!std::isfinite(mu)) throw InputError("GARCH mu must be finite");
}

std::vector<double> exp_grid(double a, double b, double c, std::size_t n) {
  if (n < 2) throw InputError("exp_grid requires at least two points");
  if (!(a < c && c < 0.5 * (a + b))) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "exp_grid: median point c = " << c << " must lie in (a, (a+b)/2) = (" << a << ", " << 0.5 * (a + b)
        << ")";
    throw InputError(msg.str());
  }
  const double s = (c * c - a * b) / (a + b - 2.0 * c);
  const double lo = std::log(a + s);
  const double hi = std::log(b + s);
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n - 1);
    g[i] = std::exp(lo + t * (hi - lo)) - s;
  }
  g.front() = a;
  g.back() = b;
  if (n % 2 == 1) g[n / 2] = c;
  for (std::size_t i = 1; i < n; ++i)
    if (!(g[i] > g[i - 1])) throw InputError("exp_grid: points are not strictly increasing (range too wide)");
  return g;
}

GarchGrids build_grids(const GarchSpec& spec, std::size_t n_eps, std::size_t n_v) {
  spec.validate();
  if (n_eps < 3 || n_eps % 2 == 0) throw InputError("N_eps must be an odd number >= 3");
  if (n_v < 2) throw InputError("N_v must be at least 2");

  const double ne = static_cast<double>(n_eps);
  const double mean_v = spec.unconditional_variance();
  GarchGrids g;
  g.k = std::sqrt(1.0 + ne * (1.0 - spec.rho) * (1.0 + spec.rho / spec.alpha));
  g.eps_max = g.k * std::sqrt(mean_v);

  // Built from the midpoint outwards so that the grid is exactly antisymmetric.
  const std::size_t mid = n_eps / 2;
  g.eps_grid.assign(n_eps, 0.0);
  for (std::size_t j = 1; j <= mid; ++j) {
    const double e = g.eps_max * static_cast<double>(j) / static_cast<double>(mid);
    g.eps_grid[mid + j] = e;
    g.eps_grid[mid - j] = -e;
  }

  const double v_max = (1.0 + ne * (spec.alpha + spec.rho)) * mean_v;
  g.v_grid = exp_grid(spec.omega, v_max, mean_v, n_v);
  return g;
}

std::vector<double> innovation_probabilities(std::span<const double> eps, double v_hat) {
  const std::size_t n = eps.size();
  if (n < 3 || n % 2 == 0) throw InputError("innovation grid must have an odd number >= 3 of points");
  const double e_max = eps.back();
  if (!(v_hat > 0.0) || !(v_hat < e_max * e_max))
    throw NumericalError("innovation variance outside (0, eps_max^2): grid cannot match the second moment");
  const std::size_t mid = n / 2;
  std::vector<double> q(n, 0.0);

  if (n == 3) {
    const double p = v_hat / (2.0 * e_max * e_max);
    q = {p, 1.0 - 2.0 * p, p};
    return q;
  }

  // q_j proportional to base_j exp(lambda eps_j^2), base = N(0, v_hat) density. Only the
  // half grid j >= mid is carried; symmetry makes the mean constraint automatic.
  std::vector<double> e2(mid + 1), logbase(mid + 1), w(mid + 1);
  for (std::size_t j = 0; j <= mid; ++j) {
    e2[j] = eps[mid + j] * eps[mid + j];
    logbase[j] = -0.5 * e2[j] / v_hat;
  }
  auto moments = [&](double lambda, double& m2, double& m4) {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j <= mid; ++j) top = std::max(top, logbase[j] + lambda * e2[j]);
    double total = 0.0;
    for (std::size_t j = 0; j <= mid; ++j) {
      w[j] = std::exp(logbase[j] + lambda * e2[j] - top) * (j == 0 ? 1.0 : 2.0);
      total += w[j];
    }
    m2 = m4 = 0.0;
    for (std::size_t j = 0; j <= mid; ++j) {
      w[j] /= total;
      m2 += w[j] * e2[j];
      m4 += w[j] * e2[j] * e2[j];
    }
  };

  double lambda = 0.0, m2 = 0.0, m4 = 0.0;
  moments(lambda, m2, m4);
  double f = m2 - v_hat;
  bool ok = false;
  for (int it = 0; it < 200; ++it) {
    if (std::abs(f) <= 1e-15 * v_hat) {
      ok = true;
      break;
    }
    const double slope = m4 - m2 * m2;  // d m2 / d lambda = Var(eps^2)
    if (!(slope > 0.0)) break;
    const double step = f / slope;
    double t = 1.0;
    double trial = lambda, tm2 = m2, tm4 = m4;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      trial = lambda - t * step;
      moments(trial, tm2, tm4);
      if (std::abs(tm2 - v_hat) < std::abs(f)) break;
    }
    if (!(std::abs(tm2 - v_hat) < std::abs(f))) {
      ok = std::abs(f) <= 1e-13 * v_hat;  // stalled at roundoff
      break;
    }
    lambda = trial;
    m2 = tm2;
    m4 = tm4;
    f = m2 - v_hat;
  }
  if (!ok) throw NumericalError("maximum-entropy innovation weights did not converge");

  moments(lambda, m2, m4);
  q[mid] = w[0];
  for (std::size_t j = 1; j <= mid; ++j) q[mid + j] = q[mid - j] = 0.5 * w[j];
  return q;
}

GarchRow transition_row(const GarchSpec& spec, const GarchGrids& grids, std::size_t m, std::size_t n) {
  const auto& v = grids.v_grid;
  const auto& eps = grids.eps_grid;
  if (m >= v.size() || n >= eps.size()) throw InputError("transition_row: state out of range");
  GarchRow row;
  row.v_hat = spec.omega + spec.alpha * eps[n] * eps[n] + spec.rho * v[m];

  const std::size_t nv = v.size();
  // Sizing guarantees v_hat <= v_max; allow roundoff at the top edge.
  if (row.v_hat < v.front() || row.v_hat > v.back() * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "v_hat = " << row.v_hat << " outside variance grid [" << v.front() << ", " << v.back() << "]";
    throw NumericalError(msg.str());
  }
  if (row.v_hat >= v.back()) {
    row.lower = nv - 2;
    row.theta = 1.0;
  } else {
    row.lower = static_cast<std::size_t>(std::upper_bound(v.begin(), v.end(), row.v_hat) - v.begin()) - 1;
    row.theta = (row.v_hat - v[row.lower]) / (v[row.lower + 1] - v[row.lower]);
  }

  row.innovation = innovation_probabilities(eps, row.v_hat);
  const std::size_t ne = eps.size();
  row.probs.assign(nv * ne, 0.0);
  for (std::size_t j = 0; j < ne; ++j) {
    row.probs[row.lower * ne + j] += (1.0 - row.theta) * row.innovation[j];
    row.probs[(row.lower + 1) * ne + j] += row.theta * row.innovation[j];
  }
  return row;
}

GarchChain build_chain(const GarchSpec& spec, std::size_t n_eps, std::size_t n_v) {
  const GarchGrids grids = build_grids(spec, n_eps, n_v);
  const std::size_t ns = n_v * n_eps;
  SquareMatrix p(ns);
  std::vector<double> returns(ns), v_hat(ns);
  for (std::size_t m = 0; m < n_v; ++m)
    for (std::size_t n = 0; n < n_eps; ++n) {
      const std::size_t z = m * n_eps + n;
      const GarchRow row = transition_row(spec, grids, m, n);
      for (std::size_t w = 0; w < ns; ++w) p(z, w) = row.probs[w];
      returns[z] = std::exp(spec.mu - 0.5 * grids.v_grid[m] + grids.eps_grid[n]);
      v_hat[z] = row.v_hat;
    }
  return GarchChain{spec, grids.v_grid, grids.eps_grid, TransitionMatrix(std::move(p)), std::move(returns),
                    std::move(v_hat)};
}

MarkovEnvironment chain_environment(const GarchChain& chain, double beta, double gamma, double income) {
  std::vector<StateShocks> shocks;
  shocks.reserve(chain.returns.size());
  for (double r : chain.returns)
    shocks.push_back({DiscreteSupport::constant(beta), DiscreteSupport::constant(r),
                      DiscreteSupport::constant(income)});
  return MarkovEnvironment(chain.P, std::move(shocks), gamma);
}

}  // namespace ifp
