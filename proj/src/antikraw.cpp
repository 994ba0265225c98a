#include "heunband/antikraw.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "heunband/heun.hpp"

namespace heunband {

namespace {

double parity(int n) { return n % 2 == 0 ? 1.0 : -1.0; }
double grid(int n) { return parity(n) * (n + 0.5); }

double relative_difference(const Matrix& a, const Matrix& b) {
  const double scale = frobenius_norm(b);
  const double d = frobenius_norm(a - b);
  return scale < 1e-30 ? d : d / scale;
}

void require_penta_cutoffs(int N, int n1, int n2) {
  if (N < 4 || N % 2 != 0) throw std::out_of_range("penta coefficients: N must be even and at least 4");
  if (n1 < 1 || n1 > N - 2 || n2 < 1 || n2 > N - 2) {
    throw std::out_of_range("penta coefficients: cutoffs must lie in 1..N-2");
  }
}

// Rows of the six conditions: coefficients on α₁..α₆ and right-hand side.
void penta_system(int n1, int n2, Matrix& a, std::vector<double>& r) {
  a = Matrix(6, 6);
  r.assign(6, 0.0);
  auto sq = [](double v) { return v * v; };
  a(0, 0) = grid(n1) + grid(n1 + 2);
  a(0, 2) = 1.0;
  r[0] = -(sq(grid(n1)) + sq(grid(n1 + 2)));
  a(1, 0) = grid(n1 - 1) + grid(n1 + 1);
  a(1, 2) = 1.0;
  r[1] = -(sq(grid(n1 - 1)) + sq(grid(n1 + 1)));
  a(2, 1) = sq(grid(n1)) + sq(grid(n1 + 1));
  a(2, 4) = 1.0;
  a(3, 1) = grid(n2) + grid(n2 + 2);
  a(3, 3) = 1.0;
  r[3] = -(sq(grid(n2)) + sq(grid(n2 + 2)));
  a(4, 1) = grid(n2 - 1) + grid(n2 + 1);
  a(4, 3) = 1.0;
  r[4] = -(sq(grid(n2 - 1)) + sq(grid(n2 + 1)));
  a(5, 0) = sq(grid(n2)) + sq(grid(n2 + 1));
  a(5, 5) = 1.0;
}

std::array<Matrix, 8> spanning_set(const AntiSpinRep& rep) {
  const Matrix l1s = rep.l1 * rep.l1;
  const Matrix l2s = rep.l2 * rep.l2;
  return {anticommutator(l1s, l2s), anticommutator(l1s, rep.l2), anticommutator(l2s, rep.l1),
          l1s, l2s, rep.l1, rep.l2, Matrix::identity(rep.l1.rows())};
}

}  // namespace

AntiSpinRep make_antispin(int N) {
  if (N < 0 || N % 2 != 0) throw std::invalid_argument("make_antispin: N must be even and non-negative");
  AntiSpinRep rep;
  rep.N = N;
  const auto n1 = static_cast<std::size_t>(N) + 1;
  rep.x.resize(n1);
  rep.a.assign(n1, 0.0);
  rep.b.assign(n1, 0.0);
  for (int n = 0; n <= N; ++n) {
    rep.x[n] = grid(n);
    if (n > 0) rep.a[n] = std::sqrt(((N + 1.0) * (N + 1.0) - double(n) * n) / 4.0);
  }
  rep.b[0] = parity(N) * (N + 1) / 2.0;
  std::vector<double> off(rep.a.begin() + 1, rep.a.end());
  rep.l1 = BandedOperator::tridiagonal(rep.b, off).to_dense();
  rep.l2 = Matrix::diagonal(rep.x);
  rep.l3 = anticommutator(rep.l1, rep.l2);
  return rep;
}

AntiSpinCheck check_antispin(const AntiSpinRep& rep) {
  AntiSpinCheck c;
  c.rel_l1l2 = relative_difference(anticommutator(rep.l1, rep.l2), rep.l3);
  c.rel_l2l3 = relative_difference(anticommutator(rep.l2, rep.l3), rep.l1);
  c.rel_l3l1 = relative_difference(anticommutator(rep.l3, rep.l1), rep.l2);
  const Matrix q = rep.l1 * rep.l1 + rep.l2 * rep.l2 + rep.l3 * rep.l3;
  const std::size_t n = q.rows();
  c.casimir_expected = (rep.N + 0.5) * (rep.N + 1.5);
  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) trace += q(i, i);
  c.casimir_scalar = trace / static_cast<double>(n);
  c.casimir_residual =
      frobenius_norm(q - c.casimir_expected * Matrix::identity(n)) / c.casimir_expected;
  return c;
}

double penta_kappa(int cutoff) { return 2.0 * cutoff * cutoff + 4.0 * cutoff + 2.5; }

std::array<double, 6> penta_conditions(int N, int n1, int n2, const std::array<double, 6>& alpha) {
  require_penta_cutoffs(N, n1, n2);
  Matrix a;
  std::vector<double> r;
  penta_system(n1, n2, a, r);
  std::array<double, 6> res{};
  for (std::size_t i = 0; i < 6; ++i) {
    double lhs = 0.0;
    double scale = std::max(1.0, std::abs(r[i]));
    for (std::size_t j = 0; j < 6; ++j) {
      lhs += a(i, j) * alpha[j];
      scale = std::max(scale, std::abs(a(i, j) * alpha[j]));
    }
    res[i] = std::abs(lhs - r[i]) / scale;
  }
  return res;
}

PentaCoefficients solve_penta_coeffs(int N, int n1, int n2) {
  require_penta_cutoffs(N, n1, n2);
  Matrix a;
  std::vector<double> r;
  penta_system(n1, n2, a, r);
  const auto sol = solve_linear(a, r);
  PentaCoefficients c;
  std::copy(sol.begin(), sol.end(), c.alpha.begin());
  c.kappa1 = penta_kappa(n1);
  c.kappa2 = penta_kappa(n2);
  const auto res = penta_conditions(N, n1, n2, c.alpha);
  c.conditions_residual = *std::max_element(res.begin(), res.end());
  return c;
}

BandedOperator assemble_penta_direct(const AntiSpinRep& rep, const std::array<double, 6>& alpha) {
  const auto basis = spanning_set(rep);
  Matrix m = basis[0];
  for (std::size_t i = 0; i < 6; ++i) m += alpha[i] * basis[i + 1];
  return BandedOperator::from_dense(m, 2, 1e-14);
}

PentaBand penta_band_coeffs(const AntiSpinRep& rep, const std::array<double, 6>& alpha) {
  const std::size_t n1 = rep.x.size();
  PentaBand band;
  band.g.assign(n1, 0.0);
  band.f.assign(n1, 0.0);
  const auto& x = rep.x;
  for (std::size_t n = 2; n < n1; ++n) {
    band.g[n] = rep.a[n] * rep.a[n - 1] *
                (x[n] * x[n] + x[n - 2] * x[n - 2] + alpha[0] * (x[n] + x[n - 2]) + alpha[2]);
    band.f[n] = rep.a[n] * (alpha[1] * (x[n] * x[n] + x[n - 1] * x[n - 1]) + alpha[4]);
  }
  return band;
}

double penta_band_mismatch(const AntiSpinRep& rep, const std::array<double, 6>& alpha) {
  const BandedOperator m = assemble_penta_direct(rep, alpha);
  const PentaBand band = penta_band_coeffs(rep, alpha);
  double d = 0.0;
  for (std::size_t n = 2; n < rep.x.size(); ++n) {
    d = std::max(d, std::abs(band.g[n] - m(n, n - 2)));
    d = std::max(d, std::abs(band.f[n] - m(n, n - 1)));
  }
  return d;
}

BandedOperator alternative_M(const AntiSpinRep& rep, int n1, int n2, AlternativeForm form) {
  const double c2 = (2.0 * n2 + 1.0) * (2.0 * n2 + 3.0) / 2.0;
  const double c1 = (4.0 * n1 * n1 + 8.0 * n1 - 1.0) / 2.0;
  const Matrix l1s = rep.l1 * rep.l1;
  const Matrix l2s = rep.l2 * rep.l2;
  const double l2s_coeff = form == AlternativeForm::corrected ? -c2 : c2;
  Matrix m = 2.0 * (rep.l2 * l1s * rep.l2);
  m += parity(n1 + 1) * anticommutator(rep.l2, l1s);
  m += parity(n2 + 1) * anticommutator(l2s, rep.l1);
  m += l2s_coeff * l2s;
  m += parity(n1) * (c2 + 1.0) * rep.l2;
  m -= c1 * l1s;
  m += parity(n2) * (c1 + 3.0) * rep.l1;
  return BandedOperator::from_dense(m, 2, 1e-14);
}

BandedOperator bilinear_perline_M(const AntiSpinRep& rep, int n1, int n2) {
  const LeonardPair pair = make_anti_krawtchouk(rep.N);
  const PerlineSolution sol = solve_perline_discrete(pair, n1, n2);
  return heun_matrix_e(pair, sol.tau);
}

Matrix antispin_interbasis(const AntiSpinRep& rep) {
  return interbasis_matrix(make_anti_krawtchouk(rep.N));
}

PentaVerification verify_penta(const AntiSpinRep& rep, const BandedOperator& m, int n1, int n2) {
  PentaVerification v;
  const Matrix me = m.to_dense();
  const Matrix u = antispin_interbasis(rep);
  const Matrix md = u.transpose() * me * u;
  const std::size_t size = me.rows();
  v.comm_e = commutator_residual(me, make_projector(size, n1).matrix());
  v.comm_d = commutator_residual(md, make_projector(size, n2).matrix());

  const auto be = static_cast<std::size_t>(n1) + 1;
  const auto bd = static_cast<std::size_t>(n2) + 1;
  v.spectrum_e = sym_eigen(SymmetricMatrix::from_dense(me.block(0, 0, be, be), 1e-12)).values;
  v.spectrum_d = sym_eigen(SymmetricMatrix::from_dense(md.block(0, 0, bd, bd), 1e-10)).values;
  v.gap_e = min_spectral_gap(v.spectrum_e);
  v.spread_e = spectral_spread(v.spectrum_e);
  v.gap_d = min_spectral_gap(v.spectrum_d);
  v.spread_d = spectral_spread(v.spectrum_d);
  v.simple_e = v.spectrum_e.size() < 2 || v.gap_e > 1e-8 * v.spread_e;
  v.simple_d = v.spectrum_d.size() < 2 || v.gap_d > 1e-8 * v.spread_d;
  return v;
}

std::vector<Degree4Fit> degree4_dependence(const AntiSpinRep& rep) {
  const auto basis = spanning_set(rep);
  const std::size_t n = rep.l1.rows();
  Matrix design(n * n, basis.size());
  for (std::size_t k = 0; k < basis.size(); ++k)
    for (std::size_t i = 0; i < n * n; ++i) design(i, k) = basis[k].data()[i];

  const Matrix l1s = rep.l1 * rep.l1;
  const Matrix l2s = rep.l2 * rep.l2;
  const Matrix l12 = rep.l1 * rep.l2;
  const Matrix l21 = rep.l2 * rep.l1;
  const std::array<std::pair<const char*, Matrix>, 3> targets{{
      {"L2 L1^2 L2", rep.l2 * l1s * rep.l2},
      {"L1 L2^2 L1", rep.l1 * l2s * rep.l1},
      {"(L1 L2)^2 + (L2 L1)^2", l12 * l12 + l21 * l21},
  }};

  std::vector<Degree4Fit> out;
  for (const auto& [name, target] : targets) {
    std::vector<double> rhs(target.data().begin(), target.data().end());
    const auto c = least_squares(design, rhs);
    const auto fitted = design * std::span<const double>(c);
    double res = 0.0;
    for (std::size_t i = 0; i < rhs.size(); ++i) res += (fitted[i] - rhs[i]) * (fitted[i] - rhs[i]);
    Degree4Fit fit;
    fit.name = name;
    std::copy(c.begin(), c.end(), fit.coefficients.begin());
    fit.relative_residual = std::sqrt(res) / frobenius_norm(target);
    out.push_back(fit);
  }
  return out;
}

AntiKrawReport analyze_antikraw(int N, int n1, int n2, AntiAnsatz ansatz) {
  AntiKrawReport rep;
  rep.N = N;
  rep.n1 = n1;
  rep.n2 = n2;
  rep.ansatz = ansatz;
  const AntiSpinRep spin = make_antispin(N);
  rep.algebra = check_antispin(spin);

  BandedOperator m;
  switch (ansatz) {
    case AntiAnsatz::penta: {
      rep.coefficients = solve_penta_coeffs(N, n1, n2);
      m = assemble_penta_direct(spin, rep.coefficients->alpha);
      rep.band_mismatch = penta_band_mismatch(spin, rep.coefficients->alpha);
      break;
    }
    case AntiAnsatz::alternative:
      m = alternative_M(spin, n1, n2, AlternativeForm::corrected);
      break;
    case AntiAnsatz::alternative_printed:
      m = alternative_M(spin, n1, n2, AlternativeForm::as_printed);
      break;
    case AntiAnsatz::bilinear:
      m = bilinear_perline_M(spin, n1, n2);
      break;
  }
  rep.verification = verify_penta(spin, m, n1, n2);

  const LeonardPair pair = make_anti_krawtchouk(N);
  const Matrix u = interbasis_matrix(pair);
  const RestrictionOperators v = restriction_operators(pair, n1, n2);
  const Matrix me = m.to_dense();
  rep.comm_v1 = commutator_residual(me, v.v1.to_dense());
  rep.comm_v2 = commutator_residual(u.transpose() * me * u, v.v2.to_dense());

  const auto size = static_cast<std::size_t>(n1) + 1;
  const SymmetricMatrix block = v.v1.leading_block(size);
  rep.concentration = sym_eigen(block).values;
  try {
    rep.diagonalization = diagonalize_via_commuting(block, m.leading_block(size));
  } catch (const DegenerateSpectrumError& e) {
    rep.diagnostic = e.what();
  } catch (const std::invalid_argument& e) {
    rep.diagnostic = e.what();
  }
  return rep;
}

const char* to_string(AntiAnsatz a) {
  switch (a) {
    case AntiAnsatz::penta: return "penta";
    case AntiAnsatz::alternative: return "alternative";
    case AntiAnsatz::alternative_printed: return "alternative_printed";
    case AntiAnsatz::bilinear: return "bilinear";
  }
  return "unknown";
}

AntiAnsatz parse_anti_ansatz(const std::string& name) {
  if (name == "penta") return AntiAnsatz::penta;
  if (name == "alternative") return AntiAnsatz::alternative;
  if (name == "alternative_printed") return AntiAnsatz::alternative_printed;
  if (name == "bilinear") return AntiAnsatz::bilinear;
  throw std::invalid_argument("unknown ansatz '" + name + "' (expected penta, alternative, alternative_printed, bilinear)");
}

}  // namespace heunband
