#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <string>

#include "heunband/antikraw.hpp"
#include "heunband/leonard.hpp"

using namespace heunband;

namespace {

double sign_pow(int k) { return k % 2 == 0 ? 1.0 : -1.0; }

}  // namespace

TEST_SUITE("antikraw") {
  TEST_CASE("one-dimensional representation") {
    const AntiSpinRep r = make_antispin(0);
    CHECK(r.l1(0, 0) == 0.5);
    CHECK(r.l2(0, 0) == 0.5);
    const AntiSpinCheck c = check_antispin(r);
    CHECK(c.casimir_scalar == doctest::Approx(0.75));
    CHECK(c.casimir_residual < 1e-14);
  }

  TEST_CASE("anticommutation relations and Casimir") {
    CHECK(check_antispin(make_antispin(2)).casimir_scalar == doctest::Approx(35.0 / 4.0));
    const AntiSpinCheck c8 = check_antispin(make_antispin(8));
    CHECK(c8.rel_l1l2 < 1e-10);
    CHECK(c8.rel_l2l3 < 1e-10);
    CHECK(c8.rel_l3l1 < 1e-10);
    for (int N = 0; N <= 40; N += 2) {
      const AntiSpinRep r = make_antispin(N);
      const Matrix q = r.l1 * r.l1 + r.l2 * r.l2 + r.l3 * r.l3;
      const double value = (N + 0.5) * (N + 1.5);
      CHECK(frobenius_norm(q - value * Matrix::identity(N + 1)) <= 1e-10 * value);
      CHECK(max_abs_difference(r.l3, anticommutator(r.l1, r.l2)) == 0.0);
    }
    CHECK_THROWS_AS(make_antispin(3), std::invalid_argument);
  }

  TEST_CASE("pentadiagonal coefficients") {
    CHECK(penta_kappa(3) == 32.5);
    CHECK(penta_kappa(5) == 72.5);
    const PentaCoefficients c = solve_penta_coeffs(8, 3, 5);
    CHECK(c.kappa1 == 32.5);
    CHECK(c.kappa2 == 72.5);
    CHECK(c.alpha[2] == doctest::Approx(-33.5).epsilon(1e-12));
    CHECK(c.alpha[3] == doctest::Approx(-73.5).epsilon(1e-12));
    CHECK(std::abs(c.alpha[4]) == doctest::Approx(32.5).epsilon(1e-12));
    CHECK(std::abs(c.alpha[5]) == doctest::Approx(72.5).epsilon(1e-12));
    CHECK(c.conditions_residual < 1e-12);
    // The consistent signs of the first two coefficients follow the cutoff parity.
    CHECK(c.alpha[0] == doctest::Approx(sign_pow(3 + 1)));
    CHECK(c.alpha[1] == doctest::Approx(sign_pow(5 + 1)));

    for (int N : {4, 6, 8, 10})
      for (int n1 = 1; n1 <= N - 2; ++n1)
        for (int n2 = 1; n2 <= N - 2; ++n2) {
          const PentaCoefficients s = solve_penta_coeffs(N, n1, n2);
          CHECK(s.conditions_residual < 1e-12);
          CHECK(s.alpha[2] == doctest::Approx(-1.0 - s.kappa1));
          CHECK(s.alpha[3] == doctest::Approx(-1.0 - s.kappa2));
          CHECK(std::abs(s.alpha[0]) == doctest::Approx(1.0));
          CHECK(std::abs(s.alpha[1]) == doctest::Approx(1.0));
        }
    CHECK_THROWS_AS(solve_penta_coeffs(8, 0, 5), std::out_of_range);
    CHECK_THROWS_AS(solve_penta_coeffs(8, 3, 7), std::out_of_range);
  }

  TEST_CASE("direct assembly") {
    const AntiSpinRep r = make_antispin(8);
    const Matrix l1s = r.l1 * r.l1, l2s = r.l2 * r.l2;
    const BandedOperator zero = assemble_penta_direct(r, {0, 0, 0, 0, 0, 0});
    CHECK(max_abs_difference(zero.to_dense(), anticommutator(l1s, l2s)) < 1e-12);
    CHECK(zero.effective_bandwidth(1e-14) == 2);

    const PentaCoefficients c = solve_penta_coeffs(8, 3, 5);
    const BandedOperator m = assemble_penta_direct(r, c.alpha);
    CHECK(m.effective_bandwidth(1e-14) == 2);
    CHECK(m.is_symmetric(1e-14));
  }

  TEST_CASE("closed-form band entries") {
    const AntiSpinRep r = make_antispin(8);
    const PentaCoefficients c = solve_penta_coeffs(8, 3, 5);
    const auto& al = c.alpha;
    const Matrix m = assemble_penta_direct(r, al).to_dense();
    const PentaBand band = penta_band_coeffs(r, al);
    const auto& x = r.x;
    const auto& a = r.a;
    for (std::size_t n = 2; n <= 8; ++n) {
      const double g = a[n] * a[n - 1] * (x[n] * x[n] + x[n - 2] * x[n - 2] + al[0] * (x[n] + x[n - 2]) + al[2]);
      const double f = a[n] * (al[1] * (x[n] * x[n] + x[n - 1] * x[n - 1]) + al[4]);
      CHECK(m(n, n - 2) == doctest::Approx(g).epsilon(1e-12));
      CHECK(m(n, n - 1) == doctest::Approx(f).epsilon(1e-12));
      CHECK(band.g[n] == doctest::Approx(g).epsilon(1e-12));
      CHECK(band.f[n] == doctest::Approx(f).epsilon(1e-12));
    }
    CHECK(std::abs(band.g[4]) < 1e-12);
    CHECK(std::abs(band.g[5]) < 1e-12);
    CHECK(std::abs(band.f[4]) < 1e-12);
    CHECK(penta_band_mismatch(r, al) < 1e-12);

    std::array<double, 6> no_odd = al;
    no_odd[1] = 0.0;
    no_odd[4] = 0.0;
    const PentaBand even = penta_band_coeffs(r, no_odd);
    for (std::size_t n = 2; n <= 8; ++n) CHECK(even.f[n] == 0.0);
  }

  TEST_CASE("commutation and simple spectrum") {
    const AntiSpinRep r = make_antispin(8);
    const BandedOperator m = assemble_penta_direct(r, solve_penta_coeffs(8, 3, 5).alpha);
    const PentaVerification v = verify_penta(r, m, 3, 5);
    CHECK(v.comm_e < 1e-12);
    CHECK(v.comm_d < 1e-10);
    CHECK(v.gap_e > 1e-6 * v.spread_e);
    CHECK(v.gap_d > 1e-6 * v.spread_d);
    CHECK(verify_penta(r, m, 8, 5).comm_e == 0.0);

    const PentaVerification bil = verify_penta(r, bilinear_perline_M(r, 3, 5), 3, 5);
    CHECK(bil.comm_e < 1e-12);
    CHECK(bil.gap_e < 1e-10);
    CHECK_FALSE(bil.simple_e);
  }

  TEST_CASE("pentadiagonal operator over all cutoffs") {
    int degenerate = 0;
    for (int N : {4, 6, 8, 10})
      for (int n1 = 1; n1 <= N - 2; ++n1)
        for (int n2 = 1; n2 <= N - 2; ++n2) {
          const AntiSpinRep r = make_antispin(N);
          const PentaVerification v = verify_penta(r, assemble_penta_direct(r, solve_penta_coeffs(N, n1, n2).alpha), n1, n2);
          CHECK(v.comm_e < 1e-10);
          CHECK(v.comm_d < 1e-10);
          if (!v.simple_e || !v.simple_d) {
            ++degenerate;
            MESSAGE("degenerate restricted block at N=" << N << " N1=" << n1 << " N2=" << n2);
          }
        }
    CHECK(degenerate == 0);
  }

  TEST_CASE("alternative operator") {
    const AntiSpinRep r = make_antispin(8);
    const BandedOperator m = alternative_M(r, 3, 5);
    const PentaVerification v = verify_penta(r, m, 3, 5);
    CHECK(v.comm_e < 1e-10);
    CHECK(v.comm_d < 1e-10);
    CHECK(v.simple_e);
    CHECK(v.simple_d);

    // The two readings differ by 2·c₂·L₂² with c₂ = 143/2.
    const Matrix diff = alternative_M(r, 3, 5, AlternativeForm::as_printed).to_dense() - m.to_dense();
    const Matrix l2s = r.l2 * r.l2;
    CHECK(max_abs_difference(diff, 143.0 * l2s) < 1e-10);

    // Full hand assembly with c₁ = 59/2.
    const Matrix l1s = r.l1 * r.l1;
    const double c1 = 59.0 / 2.0, c2 = 143.0 / 2.0;
    const Matrix hand = 2.0 * (r.l2 * l1s * r.l2) + anticommutator(r.l2, l1s) + anticommutator(l2s, r.l1) -
                        c2 * l2s - (c2 + 1.0) * r.l2 - c1 * l1s - (c1 + 3.0) * r.l1;
    CHECK(max_abs_difference(hand, m.to_dense()) < 1e-10);

    const PentaVerification printed = verify_penta(r, alternative_M(r, 3, 5, AlternativeForm::as_printed), 3, 5);
    CHECK(printed.comm_d > 1e-3);
  }

  TEST_CASE("degree-four products reduce to one independent term") {
    for (int N : {4, 8, 12}) {
      for (const Degree4Fit& f : degree4_dependence(make_antispin(N))) CHECK(f.relative_residual < 1e-10);
    }
  }

  TEST_CASE("report for each ansatz") {
    const AntiKrawReport p = analyze_antikraw(8, 3, 5, AntiAnsatz::penta);
    CHECK(p.diagonalization.has_value());
    CHECK(p.comm_v1 < 1e-10);
    CHECK(p.comm_v2 < 1e-10);
    const AntiKrawReport b = analyze_antikraw(8, 3, 5, AntiAnsatz::bilinear);
    CHECK_FALSE(b.diagonalization.has_value());
    CHECK(b.diagnostic.find("degenerate restricted spectrum") != std::string::npos);
    CHECK(parse_anti_ansatz("alternative") == AntiAnsatz::alternative);
    CHECK(std::string(to_string(AntiAnsatz::alternative_printed)) == "alternative_printed");
    CHECK_THROWS_AS(parse_anti_ansatz("quadratic"), std::invalid_argument);
  }
}
