#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "doctest.h"
#include "ifp/error.hpp"
#include "ifp/markov.hpp"

using ifp::SquareMatrix;

namespace {

Eigen::MatrixXd to_eigen(const SquareMatrix& m) {
  Eigen::MatrixXd e(m.size(), m.size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j) e(i, j) = m(i, j);
  return e;
}

double eigen_radius(const SquareMatrix& m) {
  return to_eigen(m).eigenvalues().cwiseAbs().maxCoeff();
}

// Largest root of lambda^2 - tr lambda + det for a nonnegative 2x2 matrix.
double quadratic_radius(const SquareMatrix& m) {
  const double tr = m(0, 0) + m(1, 1);
  const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  return 0.5 * (tr + std::sqrt(tr * tr - 4.0 * det));
}

SquareMatrix random_matrix(std::mt19937_64& rng, std::size_t n, double zero_prob) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SquareMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = u(rng) < zero_prob ? 0.0 : u(rng);
  return m;
}

ifp::TransitionMatrix random_stochastic(std::mt19937_64& rng, std::size_t n, double zero_prob) {
  SquareMatrix m = random_matrix(rng, n, zero_prob);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) += 0.1;
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += m(i, j);
    for (std::size_t j = 0; j < n; ++j) m(i, j) /= s;
  }
  return ifp::TransitionMatrix(m);
}

}  // namespace

TEST_CASE("spectral radius of small matrices") {
  CHECK(ifp::spectral_radius(SquareMatrix::identity(2)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ifp::spectral_radius(SquareMatrix{{0, 1}, {0, 0}}) == 0.0);
  CHECK(ifp::spectral_radius(SquareMatrix(3)) == 0.0);

  const SquareMatrix pd{{0.9 * 0.95, 0.1 * 1.05}, {0.1 * 0.95, 0.9 * 1.05}};
  CHECK(std::abs(ifp::spectral_radius(pd) - quadratic_radius(pd)) < 1e-12);
}

TEST_CASE("spectral radius matches quadratic formula on random 2x2") {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 500; ++k) {
    const SquareMatrix m = random_matrix(rng, 2, 0.2);
    CHECK(std::abs(ifp::spectral_radius(m) - quadratic_radius(m)) < 1e-10 * std::max(1.0, quadratic_radius(m)));
  }
}

TEST_CASE("spectral radius matches eigen solver on random matrices") {
  std::mt19937_64 rng(11);
  for (std::size_t n : {3u, 5u, 8u, 21u}) {
    for (int k = 0; k < 40; ++k) {
      const SquareMatrix m = random_matrix(rng, n, 0.6);
      const double ref = eigen_radius(m);
      CHECK(std::abs(ifp::spectral_radius(m) - ref) < 1e-10 * std::max(1.0, ref));
    }
  }
}

TEST_CASE("periodic and reducible matrices") {
  // Period-2 cycle: eigenvalues +-sqrt(ab).
  const SquareMatrix cyc{{0, 0.5}, {2.0, 0}};
  CHECK(ifp::spectral_radius(cyc) == doctest::Approx(1.0).epsilon(1e-12));
  const SquareMatrix cyc3{{0, 0.3, 0}, {0, 0, 0.9}, {0.7, 0, 0}};
  CHECK(ifp::spectral_radius(cyc3) == doctest::Approx(std::cbrt(0.3 * 0.9 * 0.7)).epsilon(1e-12));

  const SquareMatrix upper{{0.5, 0.5}, {0, 1.2}};
  CHECK(ifp::spectral_radius(upper) == doctest::Approx(1.2).epsilon(1e-12));
}

TEST_CASE("spectral radius properties") {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 30; ++k) {
    const SquareMatrix m = random_matrix(rng, 6, 0.5);
    const double r = ifp::spectral_radius(m);
    CHECK(ifp::spectral_radius(m.scaled(0.0)) == 0.0);
    CHECK(std::abs(ifp::spectral_radius(m.scaled(0.5)) - 0.5 * r) < 1e-10 * std::max(1.0, r));
    CHECK(std::abs(ifp::spectral_radius(m.scaled(2.0)) - 2.0 * r) < 1e-10 * std::max(1.0, r));

    const auto p = random_stochastic(rng, 6, 0.5);
    CHECK(std::abs(ifp::spectral_radius(p.matrix()) - 1.0) < 1e-10);

    const auto b = ifp::decompose_blocks(m);
    double top = 0.0;
    for (double c : b.class_spectral_radii) top = std::max(top, c);
    CHECK(std::abs(top - r) < 1e-10 * std::max(1.0, r));
  }
}

TEST_CASE("block decomposition examples") {
  SUBCASE("irreducible") {
    const auto b = ifp::decompose_blocks(SquareMatrix{{0.2, 0.3}, {0.4, 0.1}});
    REQUIRE(b.num_classes() == 1);
    CHECK(b.classes[0].size() == 2);
  }
  SUBCASE("upper triangular") {
    const auto b = ifp::decompose_blocks(SquareMatrix{{0.5, 0.5}, {0, 1.2}});
    REQUIRE(b.num_classes() == 2);
    const std::size_t c0 = b.class_of[0], c1 = b.class_of[1];
    CHECK(b.classes[c0] == std::vector<std::size_t>{0});
    CHECK(b.class_spectral_radii[c0] == doctest::Approx(0.5));
    CHECK(b.class_spectral_radii[c1] == doctest::Approx(1.2));
    CHECK(c0 < c1);
    CHECK(b.reach[0][c1]);
    CHECK_FALSE(b.reach[1][c0]);
  }
  SUBCASE("diagonal") {
    const auto b = ifp::decompose_blocks(SquareMatrix{{0.3, 0}, {0, 0.7}});
    REQUIRE(b.num_classes() == 2);
    CHECK(b.reach[0][b.class_of[0]]);
    CHECK_FALSE(b.reach[0][b.class_of[1]]);
    CHECK_FALSE(b.reach[1][b.class_of[0]]);
  }
  SUBCASE("transient state without self loop reaches nothing of its own") {
    const auto b = ifp::decompose_blocks(SquareMatrix{{0, 1}, {0, 0.5}});
    CHECK_FALSE(b.reach[0][b.class_of[0]]);
    CHECK(b.reach[0][b.class_of[1]]);
    CHECK(b.class_spectral_radii[b.class_of[0]] == 0.0);
  }
}

TEST_CASE("reachability agrees with boolean matrix powers") {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 40; ++k) {
    const std::size_t n = 7;
    const SquareMatrix m = random_matrix(rng, n, 0.8);
    const auto b = ifp::decompose_blocks(m);

    // Topological order: edges never go to an earlier class.
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (m(i, j) > 0.0) CHECK(b.class_of[i] <= b.class_of[j]);

    // reach_pow[i][j]: K^p(i, j) > 0 for some 1 <= p <= n.
    std::vector<std::vector<bool>> step(n, std::vector<bool>(n)), acc(n, std::vector<bool>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) step[i][j] = acc[i][j] = m(i, j) > 0.0;
    auto cur = step;
    for (std::size_t p = 2; p <= n; ++p) {
      std::vector<std::vector<bool>> next(n, std::vector<bool>(n, false));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = 0; l < n; ++l)
          if (cur[i][l])
            for (std::size_t j = 0; j < n; ++j)
              if (step[l][j]) next[i][j] = true;
      cur = next;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) acc[i][j] = acc[i][j] || cur[i][j];
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < b.num_classes(); ++c) {
        bool expect = false;
        for (std::size_t j : b.classes[c]) expect = expect || acc[i][j];
        CHECK(b.reach[i][c] == expect);
      }
  }
}

TEST_CASE("neumann solve") {
  {
    const auto x = ifp::solve_linear_neumann(SquareMatrix{{0.95}}, std::vector<double>{1.0});
    CHECK(x[0] == doctest::Approx(20.0).epsilon(1e-13));
  }
  {
    const auto x = ifp::solve_linear_neumann(SquareMatrix(2), std::vector<double>{1.0, 1.0});
    CHECK(x == std::vector<double>{1.0, 1.0});
  }
  {
    const auto x = ifp::solve_linear_neumann(SquareMatrix{{0.4, 0.4}, {0.4, 0.4}}, std::vector<double>{1.0, 1.0});
    CHECK(x[0] == doctest::Approx(5.0).epsilon(1e-13));
    CHECK(x[1] == doctest::Approx(5.0).epsilon(1e-13));
  }
  CHECK_THROWS_AS(ifp::solve_linear_neumann(SquareMatrix::identity(2), std::vector<double>{1.0, 1.0}), ifp::Error);
  CHECK_THROWS_AS(ifp::solve_linear_neumann(SquareMatrix{{0.5, 0.6}, {0.5, 0.5}}, std::vector<double>{1.0, 1.0}),
                  ifp::Error);
}

TEST_CASE("neumann solve against eigen and nonnegativity") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 40; ++k) {
    SquareMatrix m = random_matrix(rng, 6, 0.4);
    m = m.scaled(0.9 / std::max(ifp::spectral_radius(m), 1e-3));
    std::vector<double> b(6);
    for (double& v : b) v = u(rng);
    const auto x = ifp::solve_linear_neumann(m, b);
    const Eigen::VectorXd ref =
        (Eigen::MatrixXd::Identity(6, 6) - to_eigen(m)).partialPivLu().solve(Eigen::Map<Eigen::VectorXd>(b.data(), 6));
    for (std::size_t i = 0; i < 6; ++i) {
      CHECK(x[i] >= 0.0);
      CHECK(std::abs(x[i] - ref(static_cast<Eigen::Index>(i))) < 1e-10 * std::max(1.0, std::abs(ref(i))));
    }
    // Residual of (I - m) x = b.
    const auto mx = m * std::span<const double>(x);
    for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(x[i] - mx[i] - b[i]) < 1e-10);
  }
}

TEST_CASE("transition matrix validation") {
  CHECK_NOTHROW(ifp::TransitionMatrix(SquareMatrix{{0.5, 0.5}, {0.0, 1.0}}));
  CHECK_THROWS_AS(ifp::TransitionMatrix(SquareMatrix{{0.5, 0.4}, {0.0, 1.0}}), ifp::InputError);
  CHECK_THROWS_AS(ifp::TransitionMatrix(SquareMatrix{{1.5, -0.5}, {0.0, 1.0}}), ifp::InputError);
  CHECK_THROWS_AS(ifp::TransitionMatrix(SquareMatrix{{NAN, 1.0}, {0.0, 1.0}}), ifp::InputError);
}

TEST_CASE("stationary distribution") {
  std::mt19937_64 rng(13);
  const auto p = random_stochastic(rng, 5, 0.3);
  const auto pi = ifp::stationary_distribution(p);
  double total = 0.0;
  for (double v : pi) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t j = 0; j < 5; ++j) {
    double pj = 0.0;
    for (std::size_t i = 0; i < 5; ++i) pj += pi[i] * p(i, j);
    CHECK(std::abs(pj - pi[j]) < 1e-12);
  }
  // Two-state chain: pi = (q, p) / (p + q).
  const auto two = ifp::stationary_distribution(ifp::TransitionMatrix(SquareMatrix{{0.7, 0.3}, {0.1, 0.9}}));
  CHECK(two[0] == doctest::Approx(0.25).epsilon(1e-12));
}
