#pragma once

#include <string>
#include <variant>
#include <vector>

namespace ifp {

/// u'(c) = c^-gamma.
struct Crra {
  double gamma;
};

/// u'(c) = c^-gamma exp(delta sin log c). Regularly varying marginal utility whose
/// local RRA gamma - delta cos log c never settles; requires 0 < delta < gamma.
struct PathologicalSinLog {
  double gamma;
  double delta;
};

/// Marginal utility given as a piecewise-linear function in (log c, log u'), extended
/// linearly beyond the knots. Local RRA is minus the segment slope.
struct TabulatedBrra {
  std::vector<double> log_c;
  std::vector<double> log_marginal;
};

/// Marginal-utility model. Only u' is represented, never u itself.
class Utility {
 public:
  using Spec = std::variant<Crra, PathologicalSinLog, TabulatedBrra>;

  explicit Utility(Spec spec);
  static Utility crra(double gamma) { return Utility(Crra{gamma}); }

  const Spec& spec() const { return spec_; }
  bool is_crra() const { return std::holds_alternative<Crra>(spec_); }
  /// Asymptotic relative risk aversion (index of regular variation of u').
  double gamma() const { return gamma_; }
  /// Bounds of the local RRA over c > 0.
  double rra_lower() const { return rra_lo_; }
  double rra_upper() const { return rra_hi_; }
  std::string describe() const;

  double marginal(double c) const;
  double log_marginal(double c) const;
  double inverse_marginal(double m) const;
  double local_rra(double c) const;

 private:
  Spec spec_;
  double gamma_ = 0.0;
  double rra_lo_ = 0.0;
  double rra_hi_ = 0.0;
};

/// -c u''(c)/u'(c) by central difference of log u' with step h = c 1e-6.
double local_rra_finite_difference(const Utility& u, double c);

}  // namespace ifp
