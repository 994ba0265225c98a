#include "heunband/acceptance.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <random>

#include "heunband/antikraw.hpp"
#include "heunband/contdisc.hpp"
#include "heunband/diffops.hpp"
#include "heunband/heun.hpp"
#include "heunband/leonard.hpp"
#include "heunband/limiting.hpp"

namespace heunband {

namespace {

class Recorder {
 public:
  Recorder(int id, std::string title) {
    r_.id = id;
    r_.title = std::move(title);
  }

  // Records value < bound (or value > bound when `above`), keeping the
  // worst value per metric name.
  void below(const std::string& name, double value, double bound) { check(name, value, bound, false); }
  void above(const std::string& name, double value, double bound) { check(name, value, bound, true); }

  void expect(const std::string& name, bool ok) {
    auto [it, fresh] = r_.metrics.emplace(name, ok ? 1.0 : 0.0);
    if (!fresh && !ok) it->second = 0.0;
    if (!ok) r_.failures.push_back(name);
  }

  void note(std::string text) { r_.notes.push_back(std::move(text)); }

  CriterionResult finish() {
    r_.passed = r_.failures.empty();
    return r_;
  }

 private:
  void check(const std::string& name, double value, double bound, bool want_above) {
    const bool ok = want_above ? value > bound : value < bound;
    auto [it, fresh] = r_.metrics.emplace(name, value);
    if (!fresh) it->second = want_above ? std::min(it->second, value) : std::max(it->second, value);
    if (!ok || !std::isfinite(value)) {
      r_.failures.push_back(fmt::format("{} = {:.3e} (needs {} {:.1e})", name, value,
                                        want_above ? ">" : "<", bound));
    }
  }
  CriterionResult r_;
};

struct DiscreteCase {
  LeonardPair pair;
  int j1;
  int j2;
  std::string label;
};

std::vector<DiscreteCase> discrete_cases() {
  return {{make_krawtchouk(20, 0.3), 7, 11, "krawtchouk"},
          {make_hahn(12, 0.5, 1.5), 4, 8, "hahn"}};
}

double max_deviation(const SymmetricMatrix& a, const SymmetricMatrix& b) {
  return max_abs_difference(a.to_dense(), b.to_dense());
}

}  // namespace

CriterionResult check_discrete_pipeline() {
  Recorder rec(1, "discrete pipeline: commutators, restricted gap, Rayleigh agreement");
  for (const auto& c : discrete_cases()) {
    const LimitingReport r = analyze_discrete(c.pair, c.j1, c.j2);
    rec.below(c.label + ".comm_pi1", r.comm_pi1, 1e-12);
    rec.below(c.label + ".comm_pi2", r.comm_pi2, 1e-12);
    rec.below(c.label + ".comm_v1", r.comm_v1, 1e-10);
    rec.below(c.label + ".comm_v2", r.comm_v2, 1e-10);
    rec.above(c.label + ".relative_gap_e", r.gap_e / r.spread_e, 1e-6);
    rec.above(c.label + ".relative_gap_d", r.gap_d / r.spread_d, 1e-6);
    rec.expect(c.label + ".diagonalized", r.diagonalization.has_value());
    if (r.diagonalization) rec.below(c.label + ".rayleigh_multiset", r.diagonalization->multiset_deviation, 1e-8);
  }
  return rec.finish();
}

CriterionResult check_kernel_forms() {
  Recorder rec(2, "kernel cross-forms and full-band identity");
  for (const auto& c : discrete_cases()) {
    const auto ks = kernel_matrix_sum(c.pair, c.j1, c.j2);
    const auto kd = kernel_matrix_dual(c.pair, c.j1, c.j2);
    const auto kc = kernel_matrix_cd(c.pair, c.j1, c.j2);
    rec.below(c.label + ".sum_vs_dual", max_deviation(ks, kd), 1e-10);
    rec.below(c.label + ".sum_vs_cd", max_deviation(ks, kc), 1e-10);
    rec.below(c.label + ".dual_vs_cd", max_deviation(kd, kc), 1e-10);

    const int N = static_cast<int>(c.pair.degree());
    const Matrix id = Matrix::identity(static_cast<std::size_t>(c.j1) + 1);
    rec.below(c.label + ".full_band_sum", max_abs_difference(kernel_matrix_sum(c.pair, c.j1, N).to_dense(), id), 1e-10);
    rec.below(c.label + ".full_band_dual", max_abs_difference(kernel_matrix_dual(c.pair, c.j1, N).to_dense(), id), 1e-10);
    rec.below(c.label + ".full_band_cd", max_abs_difference(kernel_matrix_cd(c.pair, c.j1, N).to_dense(), id), 1e-10);
  }
  return rec.finish();
}

CriterionResult check_duality() {
  Recorder rec(3, "Leonard duality and Christoffel-Darboux identity");
  for (int N = 2; N <= 30; ++N) {
    for (double p : {0.3, 0.5, 0.8}) rec.below("krawtchouk.duality", duality_residual(make_krawtchouk(N, p)), 1e-10);
  }
  for (int N = 2; N <= 20; ++N) {
    rec.below("hahn.duality", duality_residual(make_hahn(N, 0.5, 1.5)), 1e-10);
    rec.below("hahn.duality", duality_residual(make_hahn(N, 0.0, 0.0)), 1e-10);
  }
  for (int N = 2; N <= 20; N += 2) {
    rec.below("anti_krawtchouk.duality", duality_residual(make_anti_krawtchouk(N)), 1e-10);
  }

  std::mt19937_64 rng(20240611);
  const std::vector<std::pair<std::string, LeonardPair>> fams{
      {"krawtchouk", make_krawtchouk(20, 0.3)},
      {"hahn", make_hahn(12, 0.5, 1.5)},
      {"anti_krawtchouk", make_anti_krawtchouk(8)}};
  for (const auto& [name, pair] : fams) {
    const auto [lo, hi] = std::minmax_element(pair.lambda.begin(), pair.lambda.end());
    std::uniform_real_distribution<double> point(*lo, *hi);
    std::uniform_int_distribution<int> index(0, static_cast<int>(pair.degree()));
    const Recurrence r = pair.phi();
    for (int probe = 0; probe < 100; ++probe) {
      double x = point(rng);
      double y = point(rng);
      while (std::abs(x - y) < 1e-3 * (*hi - *lo)) y = point(rng);
      const int n = index(rng);
      rec.below(name + ".christoffel_darboux", christoffel_darboux_residual(r, x, y, static_cast<std::size_t>(n)), 1e-10);
    }
  }
  return rec.finish();
}

CriterionResult check_antispin_algebra() {
  Recorder rec(4, "anti-spin algebra and Casimir value");
  for (int N = 0; N <= 40; N += 2) {
    const AntiSpinCheck c = check_antispin(make_antispin(N));
    rec.below("casimir_residual", c.casimir_residual, 1e-10);
    rec.below("anticommutator_l1l2", c.rel_l1l2, 1e-10);
    rec.below("anticommutator_l2l3", c.rel_l2l3, 1e-10);
    rec.below("anticommutator_l3l1", c.rel_l3l1, 1e-10);
  }
  const AntiSpinCheck c8 = check_antispin(make_antispin(8));
  rec.below("casimir_N8_minus_80.75", std::abs(c8.casimir_scalar - 80.75), 1e-10);
  return rec.finish();
}

CriterionResult check_bilinear_failure() {
  Recorder rec(5, "bilinear ansatz on anti-Krawtchouk: commutes yet degenerate");
  const int N = 8, n1 = 3, n2 = 5;
  const LimitingReport r = analyze_discrete(make_anti_krawtchouk(N), n1, n2);
  rec.below("comm_v1", r.comm_v1, 1e-10);
  rec.below("comm_v2", r.comm_v2, 1e-10);
  rec.below("restricted_gap_e", r.gap_e, 1e-10);
  rec.expect("lambda_flag_degenerate", r.lambda_flag == Identifiability::degenerate);
  rec.expect("refused", !r.diagonalization.has_value() &&
                            r.diagnostic.find("degenerate restricted spectrum") != std::string::npos);

  // Informational sweep over all cutoff pairs.
  std::vector<std::string> simple;
  for (int j1 = 1; j1 <= N - 2; ++j1)
    for (int j2 = 1; j2 <= N - 2; ++j2) {
      const LimitingReport s = analyze_discrete(make_anti_krawtchouk(N), j1, j2);
      if (s.diagonalization) simple.push_back(fmt::format("({},{})", j1, j2));
    }
  if (!simple.empty()) {
    std::string list;
    for (const auto& s : simple) list += (list.empty() ? "" : " ") + s;
    rec.note("cutoff pairs whose restricted block is nonetheless simple: " + list);
  }
  return rec.finish();
}

CriterionResult check_pentadiagonal() {
  Recorder rec(6, "pentadiagonal commuting operator for anti-Krawtchouk");
  const int N = 8, n1 = 3, n2 = 5;
  const PentaCoefficients c = solve_penta_coeffs(N, n1, n2);
  rec.below("kappa1_minus_32.5", std::abs(c.kappa1 - 32.5), 1e-12);
  rec.below("kappa2_minus_72.5", std::abs(c.kappa2 - 72.5), 1e-12);
  rec.below("alpha3_minus_-33.5", std::abs(c.alpha[2] + 33.5), 1e-10);
  rec.below("alpha4_minus_-73.5", std::abs(c.alpha[3] + 73.5), 1e-10);
  rec.below("abs_alpha1_minus_1", std::abs(std::abs(c.alpha[0]) - 1.0), 1e-10);
  rec.below("abs_alpha2_minus_1", std::abs(std::abs(c.alpha[1]) - 1.0), 1e-10);
  rec.below("abs_alpha5_minus_kappa1", std::abs(std::abs(c.alpha[4]) - c.kappa1), 1e-10);
  rec.below("abs_alpha6_minus_kappa2", std::abs(std::abs(c.alpha[5]) - c.kappa2), 1e-10);
  rec.below("six_conditions", c.conditions_residual, 1e-12);
  rec.note(fmt::format("solved alpha = ({}, {}, {}, {}, {}, {})", c.alpha[0], c.alpha[1], c.alpha[2],
                       c.alpha[3], c.alpha[4], c.alpha[5]));

  const AntiSpinRep rep = make_antispin(N);
  const std::pair<std::string, BandedOperator> ops[] = {
      {"penta", assemble_penta_direct(rep, c.alpha)},
      {"alternative", alternative_M(rep, n1, n2)}};
  for (const auto& [name, m] : ops) {
    const PentaVerification v = verify_penta(rep, m, n1, n2);
    rec.below(name + ".comm_pi_n1", v.comm_e, 1e-10);
    rec.below(name + ".comm_pi_n2", v.comm_d, 1e-10);
    rec.above(name + ".relative_gap_e", v.gap_e / v.spread_e, 1e-8);
    rec.above(name + ".relative_gap_d", v.gap_d / v.spread_d, 1e-8);
  }
  return rec.finish();
}

CriterionResult check_continuous_discrete() {
  Recorder rec(7, "continuous families: commuting tridiagonal matrix and fitted sigma");
  struct Case {
    std::string label;
    ClassicalFamily family;
    int N;
    double W;
    double sigma;
  };
  const Case cases[] = {
      {"jacobi00", make_family(FamilyKind::jacobi, 0.0, 0.0), 10, 0.3, 121.0},
      {"hermite", make_family(FamilyKind::hermite), 10, 0.5, 21.0},
      {"laguerre0", make_family(FamilyKind::laguerre, 0.0), 10, 3.0, 10.5},
  };
  for (const auto& c : cases) {
    const ContDiscReport r = analyze_contdisc(c.family, c.N, c.W);
    rec.below(c.label + ".sigma_table_minus_expected", std::abs(r.sigma_table - c.sigma), 1e-12);
    rec.expect(c.label + ".quadrature_converged", r.kernel.converged);
    rec.below(c.label + ".comm_tk", r.comm_tk, 1e-8);
    rec.below(c.label + ".fitted_sigma_error", std::abs(r.fit.sigma - c.sigma), 1e-6);
    rec.below(c.label + ".offdiag_in_t_basis", r.offdiag_in_t_basis, 1e-7);
  }
  return rec.finish();
}

CriterionResult check_symbolic() {
  Recorder rec(8, "operator identities, boundary conditions, Heun parameter map");
  std::mt19937_64 rng(7031);
  std::uniform_real_distribution<double> positive(0.2, 3.0);
  std::uniform_real_distribution<double> order(0.0, 3.0);
  for (int draw = 0; draw < 5; ++draw) {
    const double t = positive(rng), w = positive(rng);
    rec.below("prolate_identity", prolate_identity_residual(t, w, {0.5, -t * t, -w * w, 1.0}), 1e-12);
    const double endpoints[] = {-t, t};
    for (const auto& b : boundary_commutation_check(prolate_operator(t, w), endpoints))
      rec.expect("prolate_boundary", b.passed);

    const double g = positive(rng), tb = positive(rng), nu = order(rng);
    rec.below("bessel_identity",
              bessel_identity_residual(g, tb, nu, {-0.5, g * g, tb * tb, nu * nu - 1.25}), 1e-12);
    const double ends[] = {-g, g};
    for (const auto& b : boundary_commutation_check(bessel_operator(g, tb, nu), ends))
      rec.expect("bessel_boundary", b.passed);
  }

  const std::pair<ClassicalFamily, double> fams[] = {
      {make_family(FamilyKind::hermite), 0.5},
      {make_family(FamilyKind::laguerre, 0.0), 3.0},
      {make_family(FamilyKind::laguerre, -0.5), 2.0},
      {make_family(FamilyKind::jacobi, 0.0, 0.0), 0.3},
      {make_family(FamilyKind::jacobi, 1.0, 1.0), -0.2}};
  for (const auto& [f, w] : fams) {
    const TildeDReport t = verify_tilde_d(f, 10, w);
    rec.expect(f.name() + ".tilde_d_boundary_at_W", t.boundary_at_w.passed);
    rec.below(f.name() + ".tilde_d_divergence_form", t.divergence_mismatch, 1e-12);
  }

  std::uniform_real_distribution<double> any(-5.0, 5.0);
  for (int draw = 0; draw < 20; ++draw) {
    const HeunCoefficients tau{any(rng), 0.5, 0.5, any(rng), any(rng)};
    const HeunOdeParams p = heun_ode_params(any(rng), any(rng), tau, any(rng));
    rec.below("epsilon_minus_1", std::abs(p.epsilon - 1.0), 1e-15);
  }
  return rec.finish();
}

std::vector<CriterionResult> run_acceptance() {
  return {check_discrete_pipeline(), check_kernel_forms(),   check_duality(),
          check_antispin_algebra(),  check_bilinear_failure(), check_pentadiagonal(),
          check_continuous_discrete(), check_symbolic()};
}

std::string summary_line(const CriterionResult& r) {
  return fmt::format("criterion {}: {}  {}", r.id, r.passed ? "PASS" : "FAIL", r.title);
}

}  // namespace heunband
