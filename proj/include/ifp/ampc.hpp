#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "ifp/environment.hpp"
#include "ifp/markov.hpp"

namespace ifp {

/// Value in [0, +inf] with an explicit infinity marker.
class Extended {
 public:
  constexpr Extended() = default;
  constexpr explicit Extended(double v) : value_(v) {}
  static constexpr Extended infinity() {
    Extended e;
    e.infinite_ = true;
    return e;
  }

  constexpr bool is_infinite() const { return infinite_; }
  /// Finite value; throws if infinite.
  double value() const;

  constexpr bool operator==(const Extended&) const = default;

 private:
  double value_ = 0.0;
  bool infinite_ = false;
};

enum class MpcClass { One, Interior, Zero };

std::string_view to_string(MpcClass c);

struct AmpcSolution {
  std::vector<Extended> x_star;
  std::vector<double> c_bar;
  std::vector<MpcClass> classification;
  double r_PD = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Iteration count from the upper seed (I - aK)^-1 b 1.
  int upper_iterations = 0;
  /// Largest relative gap between the limits from the lower and upper seeds.
  double seed_gap = 0.0;
  /// True when the limit c(a,z)/a -> c_bar(z) is guaranteed (CRRA with r(PD) < 1, or the
  /// bounded-RRA sufficient condition); otherwise c_bar is an upper bound for limsup c/a.
  bool limit_guaranteed = false;
};

/// phi(t) = (1 + t^(1/gamma))^gamma.
double phi(double t, double gamma);

/// (Fx)(z) = (1 + (K x)(z)^(1/gamma))^gamma with K = P D_{beta R^(1-gamma)}. An infinite
/// entry reached with positive weight makes the result infinite.
std::vector<Extended> apply_F(const SquareMatrix& k, double gamma, const std::vector<Extended>& x);
std::vector<Extended> apply_F(const MarkovEnvironment& env, const std::vector<Extended>& x);

/// Exact classification from the block structure of K: ONE iff row z of K vanishes,
/// ZERO iff z reaches a class with r(K_j) >= 1 - 1e-10.
std::vector<MpcClass> classify_states(const SquareMatrix& k);
std::vector<MpcClass> classify_states(const MarkovEnvironment& env);

struct FixedPointOptions {
  double tol = 1e-12;
  int max_iter = 1000000;
  double seed_agreement = 1e-9;
};

AmpcSolution solve_fixed_point(const MarkovEnvironment& env, const FixedPointOptions& opt = {});
/// Same, for utilities with local RRA bounded in [rra_lo, rra_hi]; only the guarantee flag differs.
AmpcSolution solve_fixed_point(const MarkovEnvironment& env, double rra_lo, double rra_hi,
                               const FixedPointOptions& opt = {});

/// Log utility: c_bar = 1 / ((I - P D_beta)^-1 1).
std::vector<double> closed_form_gamma1(const MarkovEnvironment& env);

/// iid lognormal returns with E R = e^mu, log-sd sigma, beta = e^-discount_rate.
double closed_form_lognormal(double gamma, double discount_rate, double mu, double sigma);

struct AffineBound {
  double a;
  double b;
};

/// (a, b) with phi(t) <= a t + b for all t >= 0.
AffineBound affine_bound_params(double gamma, double target_a);

}  // namespace ifp
