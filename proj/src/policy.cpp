#include "ifp/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ifp/error.hpp"
#include "ifp/garch.hpp"

namespace ifp {

AssetGrid AssetGrid::exponential(double a_min, double a_max, double median, std::size_t n) {
  if (!(a_min > 0.0)) throw InputError("asset grid requires a_min > 0");
  if (n < 16) throw InputError("asset grid requires at least 16 points");
  AssetGrid g{exp_grid(a_min, a_max, median, n)};
  for (std::size_t i = 1; i < n; ++i)
    if (!(g.points[i] > g.points[i - 1])) throw InputError("asset grid is not strictly increasing");
  return g;
}

PolicySolution PolicySolution::consume_everything(const AssetGrid& grid, std::size_t num_states) {
  PolicySolution s;
  s.grid = grid;
  s.num_states = num_states;
  s.c.resize(grid.size() * num_states);
  for (std::size_t z = 0; z < num_states; ++z)
    for (std::size_t i = 0; i < grid.size(); ++i) s.at(i, z) = grid.points[i];
  s.refresh_slopes();
  return s;
}

void PolicySolution::refresh_slopes() {
  const std::size_t n = grid.size();
  slope_tail.resize(num_states);
  for (std::size_t z = 0; z < num_states; ++z)
    slope_tail[z] = (at(n - 1, z) - at(n - 2, z)) / (grid.points[n - 1] - grid.points[n - 2]);
}

namespace {

double interpolate(std::span<const double> g, std::span<const double> c, double slope, double a) {
  const std::size_t n = g.size();
  if (a <= g[0]) return std::min(a, c[0] * (a / g[0]));
  if (a >= g[n - 1]) return std::clamp(c[n - 1] + slope * (a - g[n - 1]), c[n - 1], a);
  const std::size_t k = static_cast<std::size_t>(std::upper_bound(g.begin(), g.end(), a) - g.begin()) - 1;
  const double t = (a - g[k]) / (g[k + 1] - g[k]);
  return std::min(a, c[k] + t * (c[k + 1] - c[k]));
}

}  // namespace

double interpolate_policy(const PolicySolution& sol, double a, std::size_t z) {
  if (!(a > 0.0)) throw InputError("interpolate_policy requires a > 0");
  if (z >= sol.num_states) throw InputError("interpolate_policy: state out of range");
  return interpolate(sol.grid.points, sol.state(z), sol.slope_tail[z], a);
}

double rho_distance(const Utility& u, std::span<const double> c1, std::span<const double> c2) {
  if (c1.size() != c2.size()) throw InputError("rho_distance: size mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < c1.size(); ++i) d = std::max(d, std::abs(u.marginal(c1[i]) - u.marginal(c2[i])));
  return d;
}

EulerOperator::EulerOperator(const MarkovEnvironment& env, const Utility& u) : u_(u) {
  const std::size_t n = env.num_states();
  next_.resize(n);
  const auto eb = moment_vector(env, Moment::Beta);
  for (std::size_t z = 0; z < n; ++z)
    for (std::size_t w = 0; w < n; ++w) {
      const double weight = env.transition()(z, w) * eb[w];
      if (weight > 0.0) next_[z].push_back({w, weight});
    }
  for (std::size_t w = 0; w < n; ++w) {
    DiscreteSupport r;
    for (const auto& p : env.shocks(w).r.points)
      if (p.value > 0.0 && p.prob > 0.0) r.points.push_back(p);  // 0 * u'(.) = 0
    r_.push_back(std::move(r));
    DiscreteSupport y;
    for (const auto& p : env.shocks(w).y.points)
      if (p.prob > 0.0) y.points.push_back(p);
    y_.push_back(std::move(y));
  }
}

double EulerOperator::expectation(const PolicySolution& prev, double a, double xi, std::size_t z) const {
  const double saved = a - xi;
  const auto& g = prev.grid.points;
  double total = 0.0;
  for (const Next& nx : next_[z]) {
    const auto cz = prev.state(nx.state);
    const double slope = prev.slope_tail[nx.state];
    double inner = 0.0;
    for (const auto& r : r_[nx.state].points) {
      double over_y = 0.0;
      for (const auto& y : y_[nx.state].points) {
        const double next_assets = r.value * saved + y.value;
        if (!(next_assets > 0.0)) return std::numeric_limits<double>::infinity();
        over_y += y.prob * u_.marginal(interpolate(g, cz, slope, next_assets));
      }
      inner += r.prob * r.value * over_y;
    }
    total += nx.weight * inner;
  }
  return total;
}

double EulerOperator::update(const PolicySolution& prev, double a, std::size_t z) const {
  if (next_[z].empty()) return a;
  if (expectation(prev, a, a, z) <= u_.marginal(a)) return a;  // borrowing constraint binds
  double lo = 0.0, hi = a;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (u_.marginal(mid) > expectation(prev, a, mid, z))
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double EulerOperator::residual(const PolicySolution& prev, double a, std::size_t z, double c) const {
  const double rhs = next_[z].empty() ? u_.marginal(a) : std::max(expectation(prev, a, c, z), u_.marginal(a));
  return std::abs(u_.marginal(c) - rhs);
}

double euler_update(const MarkovEnvironment& env, const Utility& u, const PolicySolution& prev, double a,
                    std::size_t z) {
  if (!(a > 0.0)) throw InputError("euler_update requires a > 0");
  return EulerOperator(env, u).update(prev, a, z);
}

MarkovEnvironment nudge_zero_income(const MarkovEnvironment& env) {
  std::vector<StateShocks> shocks = env.shocks();
  for (auto& s : shocks)
    for (auto& p : s.y.points)
      if (p.value == 0.0) p.value = 1e-10;
  return env.with_shocks(std::move(shocks));
}

namespace {

double max_relative_change(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]) / std::max(a[i], b[i]));
  return d;
}

double median_ratio(const std::vector<double>& trace) {
  const std::size_t n = trace.size();
  if (n < 3) return 0.0;
  const std::size_t window = std::min<std::size_t>(50, n / 2);
  std::vector<double> ratios;
  for (std::size_t i = n - window; i < n; ++i)
    if (trace[i - 1] > 0.0) ratios.push_back(trace[i] / trace[i - 1]);
  if (ratios.empty()) return 0.0;
  std::nth_element(ratios.begin(), ratios.begin() + ratios.size() / 2, ratios.end());
  return ratios[ratios.size() / 2];
}

}  // namespace

PolicySolution iterate_policy(const MarkovEnvironment& env_in, const Utility& u, const AssetGrid& grid,
                              const PolicyOptions& opt) {
  if (!(opt.tol > 0.0) || !(opt.rel_tol > 0.0) || opt.max_iter < 1 || opt.threads < 1)
    throw InputError("iterate_policy: tolerances, max_iter and threads must be positive");
  if (grid.size() < 16) throw InputError("iterate_policy: asset grid needs at least 16 points");
  const MarkovEnvironment env = nudge_zero_income(env_in);
  if (!check_conditions(env).assumption2_ok)
    throw InputError("iterate_policy requires r(P D_beta) < 1 and r(P D_betaR) < 1");

  const EulerOperator op(env, u);
  PolicySolution cur = PolicySolution::consume_everything(grid, env.num_states());
  std::vector<double> next(cur.c.size());

  for (int it = 1; it <= opt.max_iter; ++it) {
    if (opt.threads == 1)
      kernels::policy_sweep_serial(op, cur, next);
    else
      kernels::policy_sweep_parallel(op, cur, next, opt.threads);

    const double rho = rho_distance(u, cur.c, next);
    const double change = max_relative_change(cur.c, next);
    cur.c.swap(next);
    cur.refresh_slopes();
    cur.rho_trace.push_back(rho);
    cur.change_trace.push_back(change);
    cur.iterations = it;
    if (opt.observer) opt.observer(cur);
    if (rho < opt.tol || change < opt.rel_tol) {
      cur.converged = true;
      break;
    }
  }
  cur.contraction_modulus = median_ratio(cur.rho_trace);
  return cur;
}

namespace kernels {

void policy_sweep_serial(const EulerOperator& op, const PolicySolution& prev, std::span<double> out) {
  const std::size_t n = prev.grid.size();
  for (std::size_t z = 0; z < prev.num_states; ++z)
    for (std::size_t i = 0; i < n; ++i) out[z * n + i] = op.update(prev, prev.grid.points[i], z);
}

}  // namespace kernels

}  // namespace ifp
