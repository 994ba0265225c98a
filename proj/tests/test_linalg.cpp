#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <limits>
#include <random>

#include "heunband/linalg.hpp"
#include "test_support.hpp"

using namespace heunband;
using heunband::testing::cofactor_det;
using heunband::testing::random_symmetric;

TEST_SUITE("linalg") {
  TEST_CASE("eigenvalues of small matrices") {
    SUBCASE("reflection") {
      SymmetricMatrix a(2);
      a(1, 0) = 1.0;
      const Spectrum s = sym_eigen(a);
      CHECK(s.values[0] == doctest::Approx(-1.0).epsilon(1e-14));
      CHECK(s.values[1] == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("identity") {
      const Spectrum s = sym_eigen(SymmetricMatrix::from_dense(Matrix::identity(5)));
      for (double v : s.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("three-point anti-spin tridiagonal") {
      const double d[] = {1.5, 0.0, 0.0};
      const double off[] = {std::sqrt(2.0), std::sqrt(1.25)};
      const BandedOperator t = BandedOperator::tridiagonal(d, off);
      const Spectrum s = sym_eigen(t.to_symmetric());
      // Characteristic polynomial: every eigenvalue annihilates det(A - x I).
      const double expected[] = {-1.5, 0.5, 2.5};
      for (int k = 0; k < 3; ++k) {
        CHECK(s.values[k] == doctest::Approx(expected[k]).epsilon(1e-13));
        Matrix shifted = t.to_dense() - expected[k] * Matrix::identity(3);
        CHECK(std::abs(cofactor_det(shifted)) < 1e-13);
      }
      CHECK(s.values[0] + s.values[1] + s.values[2] == doctest::Approx(1.5));
      CHECK(cofactor_det(t.to_dense()) == doctest::Approx(-15.0 / 8.0));
    }
  }

  TEST_CASE("non-finite input is rejected") {
    SymmetricMatrix a(2);
    a(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(sym_eigen(a), std::invalid_argument);
  }

  TEST_CASE("spectra are orthonormal and reproduce the matrix") {
    std::mt19937_64 rng(11);
    for (std::size_t n : {1u, 2u, 5u, 17u, 40u}) {
      const Matrix a = random_symmetric(n, rng);
      const Spectrum s = sym_eigen(SymmetricMatrix::from_dense(a));
      const Matrix& v = s.vectors;
      CHECK(max_abs_difference(v.transpose() * v, Matrix::identity(n)) < 1e-12);
      const Matrix av = a * v;
      const Matrix vl = v * Matrix::diagonal(s.values);
      CHECK(frobenius_norm(av - vl) <= 1e-10 * frobenius_norm(a));
      CHECK(frobenius_norm(a - v * Matrix::diagonal(s.values) * v.transpose()) <= 1e-10 * frobenius_norm(a));
      for (std::size_t i = 1; i < n; ++i) CHECK(s.values[i - 1] <= s.values[i]);
    }
  }

  TEST_CASE("eigensolver is deterministic") {
    std::mt19937_64 rng(5);
    const SymmetricMatrix a = SymmetricMatrix::from_dense(random_symmetric(23, rng));
    const Spectrum s1 = sym_eigen(a);
    const Spectrum s2 = sym_eigen(a);
    CHECK(s1.values == s2.values);
    CHECK(std::equal(s1.vectors.data().begin(), s1.vectors.data().end(), s2.vectors.data().begin()));
  }

  TEST_CASE("leading eigenvector components are non-negative") {
    std::mt19937_64 rng(8);
    const Spectrum s = sym_eigen(SymmetricMatrix::from_dense(random_symmetric(9, rng)));
    for (std::size_t k = 0; k < 9; ++k) {
      std::size_t i = 0;
      while (std::abs(s.vectors(i, k)) <= 1e-12) ++i;
      CHECK(s.vectors(i, k) > 0.0);
    }
  }

  TEST_CASE("commutator residual") {
    const double d[] = {1.0, 2.0};
    const Matrix a = Matrix::diagonal(d);
    Matrix b(2, 2);
    b(0, 1) = b(1, 0) = 1.0;
    // AB - BA = [[0,-1],[1,0]]: norm sqrt 2; norms sqrt 5 and sqrt 2.
    CHECK(commutator_residual(a, b) == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-15));
    CHECK(commutator_residual(a, a) == 0.0);

    std::mt19937_64 rng(3);
    const Matrix x = random_symmetric(6, rng), y = random_symmetric(6, rng);
    CHECK(commutator_residual(x, y) == doctest::Approx(commutator_residual(y, x)).epsilon(1e-15));
    CHECK(commutator_residual(Matrix(3, 3), x.block(0, 0, 3, 3)) == 0.0);
    CHECK_THROWS(commutator_residual(Matrix(2, 2), Matrix(3, 3)));
  }

  TEST_CASE("spectral gaps") {
    const double repeated[] = {1, 3, 3, 7};
    const double even[] = {0, 1, 2};
    const double single[] = {4};
    CHECK(min_spectral_gap(repeated) == 0.0);
    CHECK(min_spectral_gap(even) == 1.0);
    CHECK(std::isinf(min_spectral_gap(single)));
    const double unsorted[] = {7, 1, 4};
    CHECK(min_spectral_gap(unsorted) == 3.0);
    CHECK(spectral_spread(unsorted) == 6.0);
  }

  TEST_CASE("banded round trip") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (std::size_t bw : {0u, 1u, 2u}) {
      BandedOperator m(9, bw);
      for (std::size_t i = 0; i < 9; ++i)
        for (std::size_t j = 0; j < 9; ++j)
          if ((i > j ? i - j : j - i) <= bw) m.set(i, j, u(rng));
      const Matrix dense = m.to_dense();
      const BandedOperator back = BandedOperator::from_dense(dense, bw);
      CHECK(max_abs_difference(back.to_dense(), dense) == 0.0);
      for (long k = -static_cast<long>(bw); k <= static_cast<long>(bw); ++k) {
        const auto d1 = m.diagonal_at(k), d2 = back.diagonal_at(k);
        CHECK(std::equal(d1.begin(), d1.end(), d2.begin()));
      }
    }
    Matrix wide(4, 4);
    wide(0, 3) = 1.0;
    CHECK_THROWS_AS(BandedOperator::from_dense(wide, 1), std::invalid_argument);
    BandedOperator t(4, 1);
    CHECK_THROWS_AS(t.set(0, 2, 1.0), std::out_of_range);
  }

  TEST_CASE("linear solvers") {
    std::mt19937_64 rng(2);
    const Matrix a = heunband::testing::random_matrix(6, 6, rng);
    const std::vector<double> x{1, -2, 3, 0.5, -1, 2};
    const auto b = a * std::span<const double>(x);
    const auto y = solve_linear(a, b);
    for (std::size_t i = 0; i < 6; ++i) CHECK(y[i] == doctest::Approx(x[i]).epsilon(1e-12));
    CHECK_THROWS_AS(solve_linear(Matrix(3, 3), {1, 2, 3}), std::invalid_argument);

    // Overdetermined but consistent system: exact recovery.
    const Matrix tall = heunband::testing::random_matrix(10, 4, rng);
    const std::vector<double> z{2, -1, 0.25, 4};
    const auto c = least_squares(tall, tall * std::span<const double>(z));
    for (std::size_t i = 0; i < 4; ++i) CHECK(c[i] == doctest::Approx(z[i]).epsilon(1e-12));
  }
}
