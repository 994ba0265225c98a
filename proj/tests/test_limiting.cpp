#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>
#include <string>

#include "heunband/heun.hpp"
#include "heunband/leonard.hpp"
#include "heunband/limiting.hpp"

using namespace heunband;

namespace {

double max_deviation(const SymmetricMatrix& a, const SymmetricMatrix& b) {
  return max_abs_difference(a.to_dense(), b.to_dense());
}

// π₂ in the e-basis from the eigenvectors of Z = tridiag(ξ, η) directly.
Matrix projector_from_eigenvectors(const LeonardPair& p, int j2) {
  const Spectrum s = sym_eigen(p.chi().jacobi_matrix().to_symmetric());
  const std::size_t n = p.size();
  Matrix proj(n, n);
  for (int t = 0; t <= j2; ++t) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < n; ++k)
      if (std::abs(s.values[k] - p.mu[t]) < std::abs(s.values[best] - p.mu[t])) best = k;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) proj(i, j) += s.vectors(i, best) * s.vectors(j, best);
  }
  return proj;
}

std::vector<LeonardPair> sample_pairs() {
  return {make_krawtchouk(20, 0.3), make_krawtchouk(15, 0.65), make_hahn(12, 0.5, 1.5), make_hahn(10, 0.0, 0.0)};
}

}  // namespace

TEST_SUITE("limiting") {
  TEST_CASE("projectors") {
    const Matrix p = make_projector(6, 2).matrix();
    CHECK(max_abs_difference(p * p, p) == 0.0);
    double trace = 0.0;
    for (int i = 0; i < 6; ++i) trace += p(i, i);
    CHECK(trace == 3.0);
    CHECK_THROWS_AS(make_projector(6, 6), std::out_of_range);
    CHECK_THROWS_AS(make_projector(6, -1), std::out_of_range);
  }

  TEST_CASE("restriction operators") {
    const LeonardPair k = make_krawtchouk(20, 0.3);
    const RestrictionOperators full = restriction_operators(k, 7, 20);
    CHECK(max_abs_difference(full.v1.to_dense(), make_projector(21, 7).matrix()) < 1e-12);
    const RestrictionOperators all = restriction_operators(k, 20, 20);
    CHECK(max_abs_difference(all.v1.to_dense(), Matrix::identity(21)) < 1e-12);

    const RestrictionOperators v = restriction_operators(k, 7, 11);
    const Matrix p1 = make_projector(21, 7).matrix();
    const Matrix oracle = p1 * projector_from_eigenvectors(k, 11) * p1;
    CHECK(max_abs_difference(v.v1.to_dense(), oracle) < 1e-10);

    const Spectrum s = sym_eigen(v.v1);
    for (double x : s.values) {
      CHECK(x >= -1e-10);
      CHECK(x <= 1.0 + 1e-10);
    }
    double trace_v = 0.0, trace_k = 0.0;
    const SymmetricMatrix kk = kernel_matrix_sum(k, 7, 11);
    for (int i = 0; i <= 7; ++i) {
      trace_v += v.v1(i, i);
      trace_k += kk(i, i);
    }
    CHECK(trace_v == doctest::Approx(trace_k).epsilon(1e-12));
    CHECK(max_deviation(v.v1.leading_block(8), kk) < 1e-10);
  }

  TEST_CASE("V1 and V2 share their nonzero spectrum") {
    for (const LeonardPair& p : sample_pairs()) {
      const RestrictionOperators v = restriction_operators(p, 4, 6);
      auto nonzero = [](const SymmetricMatrix& m) {
        std::vector<double> out;
        for (double x : sym_eigen(m).values)
          if (x > 1e-9) out.push_back(x);
        return out;
      };
      const auto a = nonzero(v.v1), b = nonzero(v.v2);
      REQUIRE(a.size() == b.size());
      for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-10);
    }
  }

  TEST_CASE("three kernel forms agree") {
    for (const LeonardPair& p : sample_pairs()) {
      const int N = static_cast<int>(p.degree());
      for (int j1 = 0; j1 < N; j1 += 3) {
        for (int j2 = 0; j2 < N; j2 += 2) {
          const auto ks = kernel_matrix_sum(p, j1, j2);
          const auto kd = kernel_matrix_dual(p, j1, j2);
          const auto kc = kernel_matrix_cd(p, j1, j2);
          CHECK(max_deviation(ks, kd) < 1e-10);
          CHECK(max_deviation(ks, kc) < 1e-10);
          CHECK(max_deviation(kd, kc) < 1e-10);
        }
        const Matrix id = Matrix::identity(static_cast<std::size_t>(j1) + 1);
        CHECK(max_abs_difference(kernel_matrix_sum(p, j1, N).to_dense(), id) < 1e-10);
        CHECK(max_abs_difference(kernel_matrix_dual(p, j1, N).to_dense(), id) < 1e-10);
        CHECK(max_abs_difference(kernel_matrix_cd(p, j1, N).to_dense(), id) < 1e-10);
      }
    }
    const SymmetricMatrix one = kernel_matrix_sum(make_krawtchouk(20, 0.3), 0, 5);
    CHECK(one.size() == 1);
    CHECK(one(0, 0) >= 0.0);
    CHECK(one(0, 0) <= 1.0);
  }

  TEST_CASE("projector commutation of the tridiagonal operator") {
    const LeonardPair k = make_krawtchouk(20, 0.3);
    const PerlineSolution s = solve_perline_discrete(k, 7, 11);
    const BandedOperator me = heun_matrix_e(k, s.tau);
    const ProjectorCommutation right = verify_projector_commutation(me, 7);
    CHECK(right.band_residual < 1e-12);
    CHECK(right.dense_residual < 1e-12);
    CHECK(verify_projector_commutation(me, 9).band_residual > 1e-2);
    CHECK(verify_projector_commutation(heun_matrix_d(k, s.tau), 11).band_residual < 1e-12);
    const double d[] = {3, 1, 4, 1, 5};
    for (int j = 0; j < 5; ++j) {
      CHECK(verify_projector_commutation(BandedOperator::diagonal(d), j).band_residual == 0.0);
      CHECK(verify_projector_commutation(BandedOperator::diagonal(d), j).dense_residual == 0.0);
    }
  }

  TEST_CASE("diagonalization through the commuting operator") {
    SUBCASE("identity kernel") {
      const double d[] = {1, 2, 3, 4};
      const DiagonalizationReport r =
          diagonalize_via_commuting(SymmetricMatrix::from_dense(Matrix::identity(4)), BandedOperator::diagonal(d));
      for (double x : r.rayleigh) CHECK(x == doctest::Approx(1.0));
    }
    SUBCASE("Krawtchouk") {
      const LimitingReport r = analyze_discrete(make_krawtchouk(20, 0.3), 7, 11);
      REQUIRE(r.diagonalization.has_value());
      CHECK(r.diagonalization->multiset_deviation < 1e-8);
      CHECK(r.diagonalization->max_eigen_residual < 1e-8);
      for (double c : r.concentration) {
        CHECK(c >= -1e-10);
        CHECK(c <= 1.0 + 1e-10);
      }
    }
    SUBCASE("degenerate commuting operator is refused") {
      const LimitingReport r = analyze_discrete(make_anti_krawtchouk(8), 3, 5);
      CHECK_FALSE(r.diagonalization.has_value());
      CHECK(r.diagnostic.find("degenerate restricted spectrum") != std::string::npos);
      CHECK(r.comm_v1 < 1e-10);
      const LeonardPair a = make_anti_krawtchouk(8);
      const PerlineSolution s = solve_perline_discrete(a, 3, 5);
      CHECK_THROWS_AS(diagonalize_via_commuting(kernel_matrix_sum(a, 3, 5), heun_matrix_e(a, s.tau).leading_block(4)),
                      DegenerateSpectrumError);
    }
    SUBCASE("non-commuting pair is rejected") {
      const double d[] = {1, 2, 3};
      Matrix k = Matrix::identity(3);
      k(0, 1) = k(1, 0) = 0.5;
      CHECK_THROWS_AS(diagonalize_via_commuting(SymmetricMatrix::from_dense(k), BandedOperator::diagonal(d)),
                      std::invalid_argument);
    }
  }

  TEST_CASE("restricted spectra are simple for identifiable families") {
    for (const LeonardPair& p : sample_pairs()) {
      const int N = static_cast<int>(p.degree());
      for (int j1 = 1; j1 < N; j1 += 2) {
        for (int j2 = 1; j2 < N; j2 += 3) {
          const LimitingReport r = analyze_discrete(p, j1, j2);
          CHECK(r.comm_pi1 < 1e-12);
          CHECK(r.comm_pi2 < 1e-12);
          CHECK(r.comm_v1 < 1e-10);
          CHECK(r.comm_v2 < 1e-10);
          CHECK(r.gap_e > 1e-6 * r.spread_e);
          CHECK(r.gap_d > 1e-6 * r.spread_d);
          CHECK(r.diagonalization.has_value());
        }
      }
    }
  }
}
