#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <random>

#include "heunband/heun.hpp"
#include "heunband/leonard.hpp"
#include "heunband/limiting.hpp"

using namespace heunband;

namespace {

HeunCoefficients random_tau(std::mt19937_64& rng, bool symmetric) {
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  HeunCoefficients t{u(rng), u(rng), u(rng), u(rng), u(rng)};
  if (symmetric) t.tau2 = t.tau1;
  return t;
}

// Compares closed-form band entries with a dense matrix: lower[k] = M(k, k−1).
double band_mismatch(const TridiagCoefficients& c, const Matrix& m) {
  double worst = 0.0;
  for (std::size_t k = 0; k < c.diag.size(); ++k) {
    worst = std::max(worst, std::abs(c.diag[k] - m(k, k)));
    if (k > 0) {
      worst = std::max(worst, std::abs(c.lower[k] - m(k, k - 1)));
      worst = std::max(worst, std::abs(c.upper[k] - m(k - 1, k)));
    }
  }
  return worst / std::max(1.0, max_abs(m));
}

}  // namespace

TEST_SUITE("heun") {
  TEST_CASE("single-term combinations") {
    const LeonardPair p = make_krawtchouk(6, 0.4);
    const BandedOperator z = p.chi().jacobi_matrix();
    const BandedOperator only_l = assemble_heun_matrix(p.lambda, z, {0, 0, 0, 1, 0});
    CHECK(max_abs_difference(only_l.to_dense(), Matrix::diagonal(p.lambda)) == 0.0);
    const BandedOperator only_z = assemble_heun_matrix(p.lambda, z, {0, 0, 0, 0, 1});
    CHECK(max_abs_difference(only_z.to_dense(), z.to_dense()) == 0.0);
    CHECK_THROWS_AS(assemble_heun_matrix(p.lambda, z, {1, 0, 0, 0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(assemble_heun_matrix(std::vector<double>{1, 2}, z, {0, 1, 1, 0, 0}), std::invalid_argument);

    const TridiagCoefficients c = heun_tridiag_coeffs_e(p, {0, 0, 0, 0, 1});
    for (std::size_t n = 1; n < p.size(); ++n) {
      CHECK(c.lower[n] == doctest::Approx(p.xi[n]));
      CHECK(c.upper[n] == doctest::Approx(p.xi[n]));
    }
    for (std::size_t n = 0; n < p.size(); ++n) CHECK(c.diag[n] == doctest::Approx(p.eta[n]));
    const TridiagCoefficients d = heun_tridiag_coeffs_d(p, {0, 0, 0, 1, 0});
    for (std::size_t n = 1; n < p.size(); ++n) CHECK(d.lower[n] == doctest::Approx(p.a[n]));
    for (std::size_t n = 0; n < p.size(); ++n) CHECK(d.diag[n] == doctest::Approx(p.b[n]));
  }

  TEST_CASE("closed-form entries match assembly in both bases") {
    std::mt19937_64 rng(12);
    for (const LeonardPair& p : {make_krawtchouk(20, 0.3), make_hahn(10, 0.5, 1.5), make_anti_krawtchouk(8)}) {
      for (bool sym : {true, false}) {
        const HeunCoefficients tau = random_tau(rng, sym);
        CHECK(band_mismatch(heun_tridiag_coeffs_e(p, tau), heun_matrix_e(p, tau).to_dense()) < 1e-12);
        CHECK(band_mismatch(heun_tridiag_coeffs_d(p, tau), heun_matrix_d(p, tau).to_dense()) < 1e-12);
        // The same operator seen from the other basis is still tridiagonal.
        const Matrix u = interbasis_matrix(p);
        const Matrix in_d = u.transpose() * heun_matrix_e(p, tau).to_dense() * u;
        CHECK(max_abs_difference(in_d, heun_matrix_d(p, tau).to_dense()) < 1e-10 * max_abs(in_d));
        CHECK_NOTHROW(BandedOperator::from_dense(in_d, 1, 1e-10 * max_abs(in_d)));
      }
    }
    const PerlineSolution s = solve_perline_discrete(make_krawtchouk(20, 0.3), 7, 11);
    const LeonardPair k = make_krawtchouk(20, 0.3);
    CHECK(band_mismatch(heun_tridiag_coeffs_e(k, s.tau), heun_matrix_e(k, s.tau).to_dense()) < 1e-12);
  }

  TEST_CASE("symmetric exactly when the two product coefficients agree") {
    std::mt19937_64 rng(31);
    const LeonardPair p = make_hahn(9, 0.0, 0.5);
    for (int trial = 0; trial < 10; ++trial) {
      const HeunCoefficients sym = random_tau(rng, true);
      CHECK(heun_matrix_e(p, sym).is_symmetric(1e-14));
      CHECK(heun_tridiag_coeffs_e(p, sym).lower == heun_tridiag_coeffs_e(p, sym).upper);
      const HeunCoefficients gen = random_tau(rng, false);
      CHECK_FALSE(heun_matrix_e(p, gen).is_symmetric(1e-10));
    }
  }

  TEST_CASE("Perline coefficients") {
    const LeonardPair k = make_krawtchouk(20, 0.3);
    const PerlineSolution s = solve_perline_discrete(k, 7, 11);
    CHECK(s.tau.tau1 == 1.0);
    CHECK(s.tau.tau2 == 1.0);
    CHECK(s.tau.tau0 == 0.0);
    CHECK(s.tau.tau4 == -(k.lambda[7] + k.lambda[8]));
    CHECK(s.tau.tau3 == -(k.mu[11] + k.mu[12]));
    CHECK(s.lambda_flag == Identifiability::identifiable);
    // The band entries straddling each cutoff cancel.
    const auto ce = heun_tridiag_coeffs_e(k, s.tau);
    const auto cd = heun_tridiag_coeffs_d(k, s.tau);
    CHECK(std::abs(ce.lower[8]) <= 1e-12 * std::abs(ce.lower[1]));
    CHECK(std::abs(ce.upper[8]) <= 1e-12 * std::abs(ce.upper[1]));
    CHECK(std::abs(cd.lower[12]) <= 1e-12 * std::abs(cd.lower[1]));

    const PerlineSolution a = solve_perline_discrete(make_anti_krawtchouk(8), 3, 5);
    CHECK(a.lambda_flag == Identifiability::degenerate);
    CHECK(a.mu_flag == Identifiability::degenerate);

    const LeonardPair h = make_hahn(10, 0.5, 1.5);
    const PerlineSolution hs = solve_perline_discrete(h, 3, 4);
    CHECK(hs.tau.tau3 == -(h.mu[4] + h.mu[5]));
    CHECK(verify_projector_commutation(heun_matrix_d(h, hs.tau), 4).dense_residual < 1e-12);

    CHECK_THROWS_AS(solve_perline_discrete(k, 20, 3), std::out_of_range);
    CHECK_THROWS_AS(solve_perline_discrete(k, 3, -1), std::out_of_range);
  }

  TEST_CASE("continuous Perline coefficients") {
    CHECK(solve_perline_continuous(0.0).tau.tau3 == 0.0);
    CHECK(solve_perline_continuous(1.25).tau.tau3 == -2.5);
    const double T = 1.6;
    const ContinuousPerline sym = solve_perline_continuous(T * T, (-T) * (-T));
    CHECK(sym.feasible);
    CHECK(sym.tau.tau1 == 1.0);
    CHECK(sym.tau.tau2 == 1.0);
    CHECK_FALSE(solve_perline_continuous(-0.5, 2.0).feasible);
  }

  TEST_CASE("Heun equation parameters") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    for (int trial = 0; trial < 20; ++trial) {
      const double t = u(rng);
      const HeunOdeParams p = heun_ode_params(u(rng), u(rng), {u(rng), t, t, u(rng), u(rng)}, u(rng));
      CHECK(p.epsilon == doctest::Approx(1.0).epsilon(1e-15));
    }
    const HeunOdeParams q = heun_ode_params(0.0, 0.5, {0.0, 0.75, 0.25, 0.0, 0.0}, 0.0);
    CHECK(q.gamma == 0.5);
    CHECK(q.epsilon == 0.5);
    CHECK(q.delta == -0.5);
    // Scale invariance: doubling every τ gives the same parameters.
    const HeunCoefficients tau{0.3, 1.0, 2.0, -0.7, 1.1};
    const HeunOdeParams p1 = heun_ode_params(0.2, 0.4, tau, 1.5);
    const HeunOdeParams p2 = heun_ode_params(0.2, 0.4, {0.6, 2.0, 4.0, -1.4, 2.2}, 1.5);
    CHECK(p1.alphabeta == doctest::Approx(p2.alphabeta));
    CHECK(p1.d == doctest::Approx(p2.d));
    CHECK(p1.q == doctest::Approx(p2.q));
    // A Lamé target needs ε = 1/2, out of reach when τ₁ = τ₂.
    CHECK(heun_ode_params(0.5, 0.5, {0, 1, 1, 0, 0}, 0.0).epsilon != 0.5);
    CHECK_THROWS_AS(heun_ode_params(0, 0, {0, 1, -1, 0, 0}, 0), std::invalid_argument);
  }
}
