#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace ifp {

/// Dense row-major square matrix.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}
  SquareMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static SquareMatrix identity(std::size_t n);
  static SquareMatrix diagonal(std::span<const double> d);

  std::size_t size() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * n_, n_}; }
  std::span<const double> data() const { return data_; }

  SquareMatrix operator*(const SquareMatrix& rhs) const;
  std::vector<double> operator*(std::span<const double> x) const;
  SquareMatrix scaled(double c) const;
  /// Principal submatrix on the given (ordered) index set.
  SquareMatrix principal(std::span<const std::size_t> idx) const;

  bool operator==(const SquareMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Row-stochastic matrix. Construction validates nonnegativity and unit row sums.
class TransitionMatrix {
 public:
  static constexpr double kRowSumTolerance = 1e-12;

  explicit TransitionMatrix(SquareMatrix p);

  std::size_t size() const { return p_.size(); }
  double operator()(std::size_t i, std::size_t j) const { return p_(i, j); }
  const SquareMatrix& matrix() const { return p_; }

 private:
  SquareMatrix p_;
};

/// Throws InputError unless every entry is finite and >= 0.
void require_nonnegative(const SquareMatrix& m);

/// P * diag(d).
SquareMatrix times_diagonal(const TransitionMatrix& p, std::span<const double> d);

/// Strongly connected classes of the positivity pattern of a nonnegative matrix.
struct BlockDecomposition {
  /// Classes in topological order: edges only go from a class to itself or a later one.
  std::vector<std::vector<std::size_t>> classes;
  std::vector<double> class_spectral_radii;
  /// class_of[z] = index into classes.
  std::vector<std::size_t> class_of;
  /// reach[z][j]: some power K^m (m >= 1) has K^m(z, zh) > 0 for a zh in class j.
  std::vector<std::vector<bool>> reach;

  std::size_t num_classes() const { return classes.size(); }
};

double spectral_radius(const SquareMatrix& m);
BlockDecomposition decompose_blocks(const SquareMatrix& m);
/// Stationary distribution of P by power iteration on the lazy chain (I + P) / 2; for
/// reducible chains, the limit reached from the uniform start.
std::vector<double> stationary_distribution(const TransitionMatrix& p, double tol = 1e-14, int max_iter = 1000000);

/// Solves (I - m) x = b for r(m) < 1.
std::vector<double> solve_linear_neumann(const SquareMatrix& m, std::span<const double> b);

}  // namespace ifp
