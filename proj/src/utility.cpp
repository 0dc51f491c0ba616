#include "ifp/utility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ifp/error.hpp"

namespace ifp {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double segment_slope(const TabulatedBrra& t, std::size_t k) {
  return (t.log_marginal[k + 1] - t.log_marginal[k]) / (t.log_c[k + 1] - t.log_c[k]);
}

double tabulated_log_marginal(const TabulatedBrra& t, double x) {
  const std::size_t n = t.log_c.size();
  std::size_t k;
  if (x <= t.log_c.front()) {
    k = 0;
  } else if (x >= t.log_c.back()) {
    k = n - 2;
  } else {
    k = static_cast<std::size_t>(std::upper_bound(t.log_c.begin(), t.log_c.end(), x) - t.log_c.begin()) - 1;
  }
  return t.log_marginal[k] + segment_slope(t, k) * (x - t.log_c[k]);
}

}  // namespace

Utility::Utility(Spec spec) : spec_(std::move(spec)) {
  std::visit(Overloaded{
                 [&](const Crra& s) {
                   if (!(s.gamma > 0.0) || !std::isfinite(s.gamma))
                     throw InputError("CRRA utility requires gamma > 0");
                   gamma_ = rra_lo_ = rra_hi_ = s.gamma;
                 },
                 [&](const PathologicalSinLog& s) {
                   if (!(s.gamma > 0.0) || !(s.delta > 0.0) || !(s.delta < s.gamma))
                     throw InputError("sin-log utility requires 0 < delta < gamma");
                   gamma_ = s.gamma;
                   rra_lo_ = s.gamma - s.delta;
                   rra_hi_ = s.gamma + s.delta;
                 },
                 [&](const TabulatedBrra& s) {
                   const std::size_t n = s.log_c.size();
                   if (n < 2 || s.log_marginal.size() != n)
                     throw InputError("tabulated utility needs at least two matching knots");
                   rra_lo_ = std::numeric_limits<double>::infinity();
                   rra_hi_ = 0.0;
                   for (std::size_t k = 0; k + 1 < n; ++k) {
                     if (!(s.log_c[k + 1] > s.log_c[k]))
                       throw InputError("tabulated utility knots must be strictly increasing in c");
                     const double rra = -segment_slope(s, k);
                     if (!(rra > 0.0))
                       throw InputError("tabulated marginal utility must be strictly decreasing");
                     rra_lo_ = std::min(rra_lo_, rra);
                     rra_hi_ = std::max(rra_hi_, rra);
                   }
                   gamma_ = -segment_slope(s, n - 2);
                 },
             },
             spec_);
}

std::string Utility::describe() const {
  std::ostringstream out;
  std::visit(Overloaded{
                 [&](const Crra& s) { out << "crra(gamma=" << s.gamma << ")"; },
                 [&](const PathologicalSinLog& s) {
                   out << "sin_log(gamma=" << s.gamma << ", delta=" << s.delta << ")";
                 },
                 [&](const TabulatedBrra& s) { out << "tabulated(" << s.log_c.size() << " knots)"; },
             },
             spec_);
  return out.str();
}

double Utility::log_marginal(double c) const {
  if (!(c > 0.0)) throw InputError("marginal utility requires c > 0");
  const double lc = std::log(c);
  return std::visit(Overloaded{
                        [&](const Crra& s) { return -s.gamma * lc; },
                        [&](const PathologicalSinLog& s) { return -s.gamma * lc + s.delta * std::sin(lc); },
                        [&](const TabulatedBrra& s) { return tabulated_log_marginal(s, lc); },
                    },
                    spec_);
}

double Utility::marginal(double c) const {
  if (!(c > 0.0)) throw InputError("marginal utility requires c > 0");
  if (const auto* s = std::get_if<Crra>(&spec_)) {
    if (s->gamma == 1.0) return 1.0 / c;
    if (s->gamma == 2.0) return 1.0 / (c * c);
    return std::pow(c, -s->gamma);
  }
  return std::exp(log_marginal(c));
}

double Utility::inverse_marginal(double m) const {
  if (!(m > 0.0)) throw InputError("inverse marginal utility requires m > 0");
  if (const auto* s = std::get_if<Crra>(&spec_)) return std::pow(m, -1.0 / s->gamma);

  // log u' is strictly decreasing in log c with slope in [-rra_hi, -rra_lo].
  const double target = std::log(m);
  double lo = -target / rra_hi_;
  double hi = lo;
  double step = 1.0;
  while (log_marginal(std::exp(lo)) < target) {
    lo -= step;
    step *= 2.0;
  }
  step = 1.0;
  while (log_marginal(std::exp(hi)) > target) {
    hi += step;
    step *= 2.0;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (log_marginal(std::exp(mid)) > target)
      lo = mid;
    else
      hi = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

double Utility::local_rra(double c) const {
  if (!(c > 0.0)) throw InputError("local RRA requires c > 0");
  return std::visit(Overloaded{
                        [&](const Crra& s) { return s.gamma; },
                        [&](const PathologicalSinLog& s) { return s.gamma - s.delta * std::cos(std::log(c)); },
                        [&](const TabulatedBrra&) { return local_rra_finite_difference(*this, c); },
                    },
                    spec_);
}

double local_rra_finite_difference(const Utility& u, double c) {
  const double h = c * 1e-6;
  // d log u'(c) / d c, times -c.
  return -c * (u.log_marginal(c + h) - u.log_marginal(c - h)) / (2.0 * h);
}

}  // namespace ifp
