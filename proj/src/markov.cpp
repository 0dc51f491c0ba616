#include "ifp/markov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ifp/error.hpp"

namespace ifp {

SquareMatrix::SquareMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : n_(rows.size()), data_() {
  data_.reserve(n_ * n_);
  for (const auto& r : rows) {
    if (r.size() != n_) throw InputError("SquareMatrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

SquareMatrix SquareMatrix::identity(std::size_t n) {
  SquareMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

SquareMatrix SquareMatrix::diagonal(std::span<const double> d) {
  SquareMatrix m(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

SquareMatrix SquareMatrix::operator*(const SquareMatrix& rhs) const {
  if (rhs.n_ != n_) throw InputError("SquareMatrix: dimension mismatch");
  SquareMatrix out(n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t k = 0; k < n_; ++k) {
      const double a = (*this)(i, k);
      if (a == 0.0) continue;
      for (std::size_t j = 0; j < n_; ++j) out(i, j) += a * rhs(k, j);
    }
  return out;
}

std::vector<double> SquareMatrix::operator*(std::span<const double> x) const {
  if (x.size() != n_) throw InputError("SquareMatrix: dimension mismatch");
  std::vector<double> y(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n_; ++j) s += (*this)(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

SquareMatrix SquareMatrix::scaled(double c) const {
  SquareMatrix out = *this;
  for (auto& v : out.data_) v *= c;
  return out;
}

SquareMatrix SquareMatrix::principal(std::span<const std::size_t> idx) const {
  SquareMatrix out(idx.size());
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = 0; b < idx.size(); ++b) out(a, b) = (*this)(idx[a], idx[b]);
  return out;
}

TransitionMatrix::TransitionMatrix(SquareMatrix p) : p_(std::move(p)) {
  if (p_.size() == 0) throw InputError("transition matrix must have at least one state");
  require_nonnegative(p_);
  for (std::size_t i = 0; i < p_.size(); ++i) {
    double s = 0.0;
    for (double v : p_.row(i)) s += v;
    if (std::abs(s - 1.0) > kRowSumTolerance) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "transition matrix row " << i << " sums to " << s;
      throw InputError(msg.str());
    }
  }
}

void require_nonnegative(const SquareMatrix& m) {
  for (double v : m.data()) {
    if (!std::isfinite(v) || v < 0.0) throw InputError("matrix entries must be finite and nonnegative");
  }
}

SquareMatrix times_diagonal(const TransitionMatrix& p, std::span<const double> d) {
  if (d.size() != p.size()) throw InputError("diagonal size does not match transition matrix");
  SquareMatrix k(p.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < p.size(); ++j) k(i, j) = p(i, j) * d[j];
  return k;
}

namespace {

// Iterative Tarjan. Emits SCCs in reverse topological order (sinks first).
std::vector<std::vector<std::size_t>> tarjan_scc(const SquareMatrix& m) {
  const std::size_t n = m.size();
  constexpr std::size_t kUnvisited = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> index(n, kUnvisited), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> out;
  std::size_t counter = 0;

  struct Frame {
    std::size_t v;
    std::size_t next;
  };
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    std::vector<Frame> call{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.next < n) {
        const std::size_t w = f.next++;
        if (m(f.v, w) <= 0.0) continue;
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
        continue;
      }
      const std::size_t v = f.v;
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
      if (low[v] == index[v]) {
        std::vector<std::size_t> comp;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back(w);
        } while (w != v);
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
      }
    }
  }
  return out;
}

// Perron root of an irreducible nonnegative block. Power iteration on K + sI with
// s the max row sum; Collatz-Wielandt bounds bracket r(K) + s at every step.
double irreducible_radius(const SquareMatrix& k) {
  const std::size_t n = k.size();
  if (n == 1) return k(0, 0);
  double shift = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (double v : k.row(i)) s += v;
    shift = std::max(shift, s);
  }
  if (shift == 0.0) return 0.0;

  constexpr int kMaxIter = 100000;
  constexpr double kTol = 1e-12;
  std::vector<double> x(n, 1.0), y(n);
  double lo = 0.0, hi = 0.0;
  for (int it = 0; it < kMaxIter; ++it) {
    lo = std::numeric_limits<double>::infinity();
    hi = 0.0;
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = shift * x[i];
      for (std::size_t j = 0; j < n; ++j) s += k(i, j) * x[j];
      y[i] = s;
      const double ratio = s / x[i];
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
      norm = std::max(norm, s);
    }
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / norm;
    if (hi - lo <= kTol * (0.5 * (lo + hi) - shift)) break;
  }
  return std::max(0.0, 0.5 * (lo + hi) - shift);
}

}  // namespace

BlockDecomposition decompose_blocks(const SquareMatrix& m) {
  require_nonnegative(m);
  const std::size_t n = m.size();
  BlockDecomposition out;
  out.classes = tarjan_scc(m);
  std::reverse(out.classes.begin(), out.classes.end());

  const std::size_t nc = out.classes.size();
  out.class_of.assign(n, 0);
  for (std::size_t j = 0; j < nc; ++j)
    for (std::size_t z : out.classes[j]) out.class_of[z] = j;

  out.class_spectral_radii.resize(nc);
  for (std::size_t j = 0; j < nc; ++j)
    out.class_spectral_radii[j] = irreducible_radius(m.principal(out.classes[j]));

  // Class-level DAG; later classes are finished first so one reverse sweep suffices.
  std::vector<std::vector<bool>> class_reach(nc, std::vector<bool>(nc, false));
  for (std::size_t jj = nc; jj-- > 0;) {
    for (std::size_t z : out.classes[jj]) {
      for (std::size_t w = 0; w < n; ++w) {
        if (m(z, w) <= 0.0) continue;
        const std::size_t jw = out.class_of[w];
        class_reach[jj][jw] = true;
        if (jw != jj)
          for (std::size_t t = 0; t < nc; ++t)
            if (class_reach[jw][t]) class_reach[jj][t] = true;
      }
    }
  }

  out.reach.assign(n, std::vector<bool>(nc, false));
  for (std::size_t z = 0; z < n; ++z) {
    for (std::size_t w = 0; w < n; ++w) {
      if (m(z, w) <= 0.0) continue;
      const std::size_t jw = out.class_of[w];
      out.reach[z][jw] = true;
      for (std::size_t t = 0; t < nc; ++t)
        if (class_reach[jw][t]) out.reach[z][t] = true;
    }
  }
  return out;
}

double spectral_radius(const SquareMatrix& m) {
  const BlockDecomposition blocks = decompose_blocks(m);
  double r = 0.0;
  for (double v : blocks.class_spectral_radii) r = std::max(r, v);
  return r;
}

std::vector<double> solve_linear_neumann(const SquareMatrix& m, std::span<const double> b) {
  const std::size_t n = m.size();
  if (b.size() != n) throw InputError("solve_linear_neumann: dimension mismatch");
  const double r = spectral_radius(m);
  if (r >= 1.0 - 1e-12) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "I - M is not invertible in the nonnegative cone: r(M) = " << r;
    throw InputError(msg.str());
  }

  // Gaussian elimination with partial pivoting on A = I - m.
  std::vector<double> a(n * n), x(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i * n + j] = (i == j ? 1.0 : 0.0) - m(i, j);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t i = col + 1; i < n; ++i)
      if (std::abs(a[i * n + col]) > std::abs(a[piv * n + col])) piv = i;
    if (a[piv * n + col] == 0.0) throw NumericalError("solve_linear_neumann: singular system");
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a[col * n + j], a[piv * n + j]);
      std::swap(x[col], x[piv]);
    }
    for (std::size_t i = col + 1; i < n; ++i) {
      const double f = a[i * n + col] / a[col * n + col];
      if (f == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) a[i * n + j] -= f * a[col * n + j];
      x[i] -= f * x[col];
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = x[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a[i * n + j] * x[j];
    x[i] = s / a[i * n + i];
  }
  return x;
}

}  // namespace ifp

namespace ifp {

std::vector<double> stationary_distribution(const TransitionMatrix& p, double tol, int max_iter) {
  const std::size_t n = p.size();
  std::vector<double> pi(n, 1.0 / static_cast<double>(n)), next(n);
  for (int it = 0; it < max_iter; ++it) {
    for (std::size_t j = 0; j < n; ++j) next[j] = 0.5 * pi[j];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) next[j] += 0.5 * pi[i] * p(i, j);
    double change = 0.0;
    for (std::size_t j = 0; j < n; ++j) change += std::abs(next[j] - pi[j]);
    pi.swap(next);
    if (change < tol) return pi;
  }
  throw NumericalError("stationary distribution: power iteration did not converge");
}

}  // namespace ifp
