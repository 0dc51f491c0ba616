#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "ifp/environment.hpp"
#include "ifp/utility.hpp"

namespace ifp {

/// Strictly increasing positive asset grid.
struct AssetGrid {
  std::vector<double> points;

  /// Shifted exponential grid on [a_min, a_max] whose middle point is `median`.
  static AssetGrid exponential(double a_min, double a_max, double median, std::size_t n);

  std::size_t size() const { return points.size(); }
  double front() const { return points.front(); }
  double back() const { return points.back(); }
};

/// Consumption policy on a grid; values stored state-major: c[z * N + i].
struct PolicySolution {
  AssetGrid grid;
  std::size_t num_states = 0;
  std::vector<double> c;
  std::vector<double> slope_tail;
  std::vector<double> rho_trace;
  /// Sup relative change of c between successive sweeps.
  std::vector<double> change_trace;
  int iterations = 0;
  bool converged = false;
  /// Median ratio of successive rho distances over the final sweeps.
  double contraction_modulus = 0.0;

  double& at(std::size_t i, std::size_t z) { return c[z * grid.size() + i]; }
  double at(std::size_t i, std::size_t z) const { return c[z * grid.size() + i]; }
  std::span<const double> state(std::size_t z) const { return {c.data() + z * grid.size(), grid.size()}; }

  /// c(a, z) = a on the grid.
  static PolicySolution consume_everything(const AssetGrid& grid, std::size_t num_states);
  void refresh_slopes();
};

/// Piecewise-linear interpolation with linear tails: through the origin below the grid,
/// slope_tail above it, always clipped to c <= a.
double interpolate_policy(const PolicySolution& sol, double a, std::size_t z);

/// sup over grid and states of |u'(c1) - u'(c2)|.
double rho_distance(const Utility& u, std::span<const double> c1, std::span<const double> c2);

/// The time iteration operator at one (a, z): the xi in (0, a] solving
/// u'(xi) = max{ E_z beta' R' u'(c(R'(a - xi) + Y', z')), u'(a) }.
class EulerOperator {
 public:
  EulerOperator(const MarkovEnvironment& env, const Utility& u);

  double update(const PolicySolution& prev, double a, std::size_t z) const;
  /// Euler residual |u'(c) - max{E(...), u'(a)}| in marginal-utility units.
  double residual(const PolicySolution& prev, double a, std::size_t z, double c) const;

  std::size_t num_states() const { return next_.size(); }
  const Utility& utility() const { return u_; }

 private:
  struct Next {
    std::size_t state;
    double weight;  // P(z, z') E_z' beta
  };
  double expectation(const PolicySolution& prev, double a, double xi, std::size_t z) const;

  Utility u_;
  std::vector<std::vector<Next>> next_;
  std::vector<DiscreteSupport> r_;
  std::vector<DiscreteSupport> y_;
};

double euler_update(const MarkovEnvironment& env, const Utility& u, const PolicySolution& prev, double a,
                    std::size_t z);

struct PolicyOptions {
  double tol = 1e-9;
  double rel_tol = 1e-10;
  int max_iter = 10000;
  /// 1 runs the serial reference sweep; more runs the OpenMP sweep.
  int threads = 1;
  /// Called after every sweep with the new iterate.
  std::function<void(const PolicySolution&)> observer;
};

/// Zero-income supports replaced by 1e-10 so that E u'(Y) stays finite.
MarkovEnvironment nudge_zero_income(const MarkovEnvironment& env);

/// Time iteration from c_0(a, z) = a. Returns with converged = false after max_iter.
PolicySolution iterate_policy(const MarkovEnvironment& env, const Utility& u, const AssetGrid& grid,
                              const PolicyOptions& opt = {});

namespace kernels {

/// One application of T on every (grid point, state). `out` has the layout of prev.c.
void policy_sweep_serial(const EulerOperator& op, const PolicySolution& prev, std::span<double> out);
void policy_sweep_parallel(const EulerOperator& op, const PolicySolution& prev, std::span<double> out,
                           int threads);

}  // namespace kernels

}  // namespace ifp
