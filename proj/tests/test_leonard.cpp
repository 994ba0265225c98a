#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>
#include <random>

#include "heunband/leonard.hpp"
#include "test_support.hpp"

using namespace heunband;

namespace {

std::vector<double> sorted_eigenvalues(const Recurrence& r) { return sym_eigen(r.jacobi_matrix().to_symmetric()).values; }

void check_pair(const LeonardPair& p) {
  const LeonardInvariants inv = check_leonard_invariants(p);
  CHECK(inv.couplings_nonzero);
  CHECK(inv.spectra_distinct);
  CHECK(inv.phi_spectrum_error < 1e-10);
  CHECK(inv.chi_spectrum_error < 1e-10);
  CHECK(duality_residual(p) < 1e-10);
}

}  // namespace

TEST_SUITE("leonard") {
  TEST_CASE("Krawtchouk pairs") {
    const LeonardPair small = make_krawtchouk(2, 0.5);
    const auto ev = sorted_eigenvalues(small.phi());
    for (int k = 0; k < 3; ++k) CHECK(ev[k] == doctest::Approx(k).epsilon(1e-13));
    CHECK(small.lambda == std::vector<double>{2, 1, 0});
    check_pair(make_krawtchouk(20, 0.3));
    CHECK_THROWS_AS(make_krawtchouk(2, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(make_krawtchouk(1, 0.5), std::invalid_argument);
  }

  TEST_CASE("Hahn pairs") {
    check_pair(make_hahn(10, 0.0, 0.0));
    check_pair(make_hahn(10, 0.5, 1.5));
    CHECK_THROWS_AS(make_hahn(10, -2.0, 0.0), std::invalid_argument);
    // Dual spectrum is quadratic in the index.
    const LeonardPair h = make_hahn(6, 0.5, 1.5);
    for (int n = 0; n <= 6; ++n) CHECK(h.mu[n] == doctest::Approx(-n * (n + 3.0)));
  }

  TEST_CASE("anti-Krawtchouk pairs") {
    const LeonardPair p = make_anti_krawtchouk(2);
    CHECK(p.a[1] == doctest::Approx(std::sqrt(2.0)));
    CHECK(p.a[2] == doctest::Approx(std::sqrt(1.25)));
    CHECK(p.b[0] == 1.5);
    CHECK(p.b[1] == 0.0);
    CHECK(p.lambda == std::vector<double>{0.5, -1.5, 2.5});
    CHECK(p.mu == p.lambda);
    CHECK(p.xi == p.a);
    // Characteristic polynomial x³ − c2 x² + c1 x − c0 against (x+3/2)(x−1/2)(x−5/2).
    const Matrix m = p.phi().jacobi_matrix().to_dense();
    const double trace = m(0, 0) + m(1, 1) + m(2, 2);
    const double minors = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0) + m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0) +
                          m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
    const double det = heunband::testing::cofactor_det(m);
    CHECK(trace == doctest::Approx(1.5));
    CHECK(minors == doctest::Approx(-1.5 * 0.5 - 1.5 * 2.5 + 0.5 * 2.5));
    CHECK(det == doctest::Approx(-1.5 * 0.5 * 2.5));
    check_pair(make_anti_krawtchouk(8));
    CHECK_THROWS_AS(make_anti_krawtchouk(3), std::invalid_argument);
  }

  TEST_CASE("orthonormal recurrence") {
    const LeonardPair k = make_krawtchouk(20, 0.3);
    CHECK(eval_orthonormal(k.phi(), 3.7, 0)[0] == 1.0);
    Recurrence flat{{0, 1, 1}, {0, 0, 0}};
    // φ1 = x, φ2 = x² − 1 at x = 0.
    CHECK(eval_orthonormal(flat, 0.0, 2)[2] == doctest::Approx(-1.0));
    CHECK_THROWS_AS(eval_orthonormal(flat, 0.0, 3), std::out_of_range);

    // Derivatives from the differentiated recurrence against central differences.
    const auto pv = eval_orthonormal_with_derivative(k.phi(), 6.3, 12);
    const double h = 1e-5;
    const auto up = eval_orthonormal(k.phi(), 6.3 + h, 12), down = eval_orthonormal(k.phi(), 6.3 - h, 12);
    for (int n = 0; n <= 12; ++n)
      CHECK(pv.slope[n] == doctest::Approx((up[n] - down[n]) / (2 * h)).epsilon(1e-6));
  }

  TEST_CASE("grid weights") {
    const GridWeights one = grid_weights(Recurrence{{0.0}, {2.0}});
    CHECK(one.weights == std::vector<double>{1.0});

    const LeonardPair k = make_krawtchouk(20, 0.3);
    const GridWeights g = grid_weights(k.phi());
    double total = 0.0;
    for (double w : g.weights) total += w;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    double worst = 0.0;
    for (std::size_t n = 0; n <= 20; ++n)
      for (std::size_t m = 0; m <= 20; ++m) {
        double s = 0.0;
        for (std::size_t i = 0; i < g.nodes.size(); ++i) {
          const auto phi = eval_orthonormal(k.phi(), g.nodes[i], 20);
          s += g.weights[i] * phi[n] * phi[m];
        }
        worst = std::max(worst, std::abs(s - (n == m ? 1.0 : 0.0)));
      }
    CHECK(worst < 1e-10);

    // Binomial weights C(20,s) p^s (1−p)^{20−s} at λ = 20 − s, independently computed.
    const auto cw = christoffel_weights(k.phi(), k.lambda);
    for (int s = 0; s <= 20; ++s) {
      const double binom = std::exp(std::lgamma(21.0) - std::lgamma(s + 1.0) - std::lgamma(21.0 - s));
      const double expected = binom * std::pow(0.7, s) * std::pow(0.3, 20 - s);
      CHECK(cw[s] == doctest::Approx(expected).epsilon(1e-9));
    }

    for (double w : grid_weights(make_anti_krawtchouk(8).phi()).weights) CHECK(w > 0.0);
  }

  TEST_CASE("duality detects a permuted grid") {
    LeonardPair p = make_krawtchouk(12, 0.3);
    std::swap(p.mu[3], p.mu[7]);
    CHECK(duality_residual(p) > 1e-2);
  }

  TEST_CASE("interbasis matrix is orthogonal and intertwines the two bases") {
    for (const LeonardPair& p : {make_krawtchouk(20, 0.3), make_hahn(12, 0.5, 1.5), make_anti_krawtchouk(10)}) {
      const Matrix u = interbasis_matrix(p);
      const std::size_t n = p.size();
      CHECK(max_abs_difference(u.transpose() * u, Matrix::identity(n)) < 1e-10);
      // Uᵀ diag(λ) U = tridiag(a, b) and U diag(μ) Uᵀ = tridiag(ξ, η).
      CHECK(max_abs_difference(u.transpose() * Matrix::diagonal(p.lambda) * u, p.phi().jacobi_matrix().to_dense()) < 1e-10);
      CHECK(max_abs_difference(u * Matrix::diagonal(p.mu) * u.transpose(), p.chi().jacobi_matrix().to_dense()) < 1e-10);
    }
  }

  TEST_CASE("Christoffel-Darboux identity at random points") {
    std::mt19937_64 rng(42);
    for (const LeonardPair& p : {make_krawtchouk(20, 0.3), make_hahn(12, 0.5, 1.5), make_anti_krawtchouk(8)}) {
      const auto [lo, hi] = std::minmax_element(p.lambda.begin(), p.lambda.end());
      std::uniform_real_distribution<double> u(*lo, *hi);
      for (int trial = 0; trial < 50; ++trial) {
        const double x = u(rng), y = u(rng);
        if (std::abs(x - y) < 1e-3) continue;
        const std::size_t n = trial % p.degree();
        CHECK(christoffel_darboux_residual(p.phi(), x, y, n) < 1e-10);
      }
    }
  }

  TEST_CASE("degeneracy of consecutive sums") {
    std::vector<double> linear(10);
    for (int n = 0; n < 10; ++n) linear[n] = n;
    CHECK(perline_degeneracy_check(linear) == Identifiability::identifiable);
    const std::vector<double> anti{0.5, -1.5, 2.5, -3.5, 4.5};
    CHECK(consecutive_sums(anti) == std::vector<double>{-1, 1, -1, 1});
    CHECK(perline_degeneracy_check(anti) == Identifiability::degenerate);
    // Bannai–Ito sequence with d = 1.
    const std::vector<double> bi{0, -3, 1, -4, 2, -5};
    CHECK(consecutive_sums(bi) == std::vector<double>{-3, -2, -3, -2, -3});
    CHECK(perline_degeneracy_check(bi) == Identifiability::degenerate);
    CHECK_THROWS_AS(perline_degeneracy_check(std::vector<double>{1, 2}), std::invalid_argument);

    for (int N = 2; N <= 50; ++N) {
      CHECK(perline_degeneracy_check(make_krawtchouk(N, 0.3).lambda) == Identifiability::identifiable);
      const LeonardPair h = make_hahn(N, 0.5, 1.5);
      CHECK(perline_degeneracy_check(h.lambda) == Identifiability::identifiable);
      CHECK(perline_degeneracy_check(h.mu) == Identifiability::identifiable);
      if (N % 2 == 0 && N >= 4) CHECK(perline_degeneracy_check(make_anti_krawtchouk(N).lambda) == Identifiability::degenerate);
    }
  }

  TEST_CASE("eigenvalue sets match the declared grids for many sizes") {
    for (int N = 2; N <= 30; ++N) {
      const LeonardInvariants k = check_leonard_invariants(make_krawtchouk(N, 0.6));
      CHECK(k.phi_spectrum_error < 1e-10);
      CHECK(k.chi_spectrum_error < 1e-10);
      const LeonardInvariants h = check_leonard_invariants(make_hahn(N, 1.0, 0.0));
      CHECK(h.phi_spectrum_error < 1e-10);
      CHECK(h.chi_spectrum_error < 1e-10);
    }
  }
}
