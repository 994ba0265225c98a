#include "heunband/limiting.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace heunband {

namespace {

void require_cutoff(const LeonardPair& pair, int j, const char* who) {
  if (j < 0 || j > static_cast<int>(pair.degree())) {
    throw std::out_of_range(std::string(who) + ": cutoff outside 0..N");
  }
}

// Sign relating each interbasis row to the recurrence row φ_n(λ_s).
std::vector<double> gauge_signs(const LeonardPair& pair) {
  const Matrix u = interbasis_matrix(pair);
  const Recurrence rec = pair.phi();
  std::vector<double> g(pair.size());
  for (std::size_t s = 0; s < pair.size(); ++s) {
    const auto phi = eval_orthonormal(rec, pair.lambda[s], pair.degree());
    double dot = 0.0;
    for (std::size_t n = 0; n < phi.size(); ++n) dot += u(s, n) * phi[n];
    g[s] = dot < 0.0 ? -1.0 : 1.0;
  }
  return g;
}

double max_abs_difference(const SymmetricMatrix& a, const SymmetricMatrix& b) {
  return heunband::max_abs_difference(a.to_dense(), b.to_dense());
}

double sorted_difference(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

Matrix Projector::matrix() const {
  Matrix p(size, size);
  for (std::size_t i = 0; i <= cutoff && i < size; ++i) p(i, i) = 1.0;
  return p;
}

Projector make_projector(std::size_t size, int cutoff) {
  if (cutoff < 0 || static_cast<std::size_t>(cutoff) >= size) {
    throw std::out_of_range("make_projector: cutoff outside 0..size-1");
  }
  return {size, static_cast<std::size_t>(cutoff)};
}

RestrictionOperators restriction_operators(const LeonardPair& pair, int j1, int j2) {
  require_cutoff(pair, j1, "restriction_operators");
  require_cutoff(pair, j2, "restriction_operators");
  const Matrix u = interbasis_matrix(pair);
  const Matrix ut = u.transpose();
  const Matrix p1 = make_projector(pair.size(), j1).matrix();
  const Matrix p2 = make_projector(pair.size(), j2).matrix();
  // π₂ in the e-basis is U P₂ Uᵀ; π₁ in the d-basis is Uᵀ P₁ U.
  const Matrix v1 = p1 * (u * p2 * ut) * p1;
  const Matrix v2 = p2 * (ut * p1 * u) * p2;
  return {SymmetricMatrix::from_dense(v1, 1e-12), SymmetricMatrix::from_dense(v2, 1e-12)};
}

SymmetricMatrix kernel_matrix_sum(const LeonardPair& pair, int j1, int j2) {
  require_cutoff(pair, j1, "kernel_matrix_sum");
  require_cutoff(pair, j2, "kernel_matrix_sum");
  const Recurrence rec = pair.phi();
  const auto w = christoffel_weights(rec, pair.lambda);
  const auto gauge = gauge_signs(pair);
  std::vector<std::vector<double>> phi;
  for (int t = 0; t <= j1; ++t) phi.push_back(eval_orthonormal(rec, pair.lambda[t], j2));

  SymmetricMatrix k(static_cast<std::size_t>(j1) + 1);
  for (int t = 0; t <= j1; ++t) {
    for (int n = 0; n <= t; ++n) {
      double sum = 0.0;
      for (int s = 0; s <= j2; ++s) sum += phi[t][s] * phi[n][s];
      k(t, n) = gauge[t] * gauge[n] * std::sqrt(w[t] * w[n]) * sum;
    }
  }
  return k;
}

SymmetricMatrix kernel_matrix_dual(const LeonardPair& pair, int j1, int j2) {
  require_cutoff(pair, j1, "kernel_matrix_dual");
  require_cutoff(pair, j2, "kernel_matrix_dual");
  const Recurrence rec = pair.chi();
  const auto w = christoffel_weights(rec, pair.mu);
  std::vector<std::vector<double>> chi;
  for (int s = 0; s <= j2; ++s) chi.push_back(eval_orthonormal(rec, pair.mu[s], j1));

  SymmetricMatrix k(static_cast<std::size_t>(j1) + 1);
  for (int t = 0; t <= j1; ++t) {
    for (int n = 0; n <= t; ++n) {
      double sum = 0.0;
      for (int s = 0; s <= j2; ++s) sum += w[s] * chi[s][t] * chi[s][n];
      k(t, n) = sum;
    }
  }
  return k;
}

SymmetricMatrix kernel_matrix_cd(const LeonardPair& pair, int j1, int j2) {
  require_cutoff(pair, j1, "kernel_matrix_cd");
  require_cutoff(pair, j2, "kernel_matrix_cd");
  const Recurrence rec = pair.phi();
  const auto w = christoffel_weights(rec, pair.lambda);
  const auto gauge = gauge_signs(pair);
  const auto m = static_cast<std::size_t>(j2);

  // ψ = a_{J2+1}φ_{J2+1}, which needs no coefficient beyond the data.
  std::vector<double> top(j1 + 1), next(j1 + 1), top_slope(j1 + 1), next_slope(j1 + 1);
  for (int t = 0; t <= j1; ++t) {
    const double x = pair.lambda[t];
    const auto pv = eval_orthonormal_with_derivative(rec, x, m);
    top[t] = pv.value[m];
    top_slope[t] = pv.slope[m];
    next[t] = scaled_next(rec, x, m, pv.value);
    const double prev_slope = m > 0 ? rec.a[m] * pv.slope[m - 1] : 0.0;
    next_slope[t] = pv.value[m] + (x - rec.b[m]) * pv.slope[m] - prev_slope;
  }

  SymmetricMatrix k(static_cast<std::size_t>(j1) + 1);
  for (int t = 0; t <= j1; ++t) {
    for (int n = 0; n < t; ++n) {
      const double quotient =
          (next[t] * top[n] - next[n] * top[t]) / (pair.lambda[t] - pair.lambda[n]);
      k(t, n) = gauge[t] * gauge[n] * std::sqrt(w[t] * w[n]) * quotient;
    }
    k(t, t) = w[t] * (next_slope[t] * top[t] - top_slope[t] * next[t]);
  }
  return k;
}

ProjectorCommutation verify_projector_commutation(const BandedOperator& m, int cutoff) {
  const Projector p = make_projector(m.size(), cutoff);
  ProjectorCommutation out;
  out.dense_residual = commutator_residual(m.to_dense(), p.matrix());
  const std::size_t j = p.cutoff;
  if (j + 1 >= m.size()) return out;
  double largest = 0.0;
  for (std::size_t i = 1; i < m.size(); ++i)
    largest = std::max({largest, std::abs(m(i, i - 1)), std::abs(m(i - 1, i))});
  if (largest == 0.0) return out;
  out.band_residual = std::max(std::abs(m(j + 1, j)), std::abs(m(j, j + 1))) / largest;
  return out;
}

DegenerateSpectrumError::DegenerateSpectrumError(double min_gap, double spread)
    : std::runtime_error(fmt::format(
          "degenerate restricted spectrum: the commuting operator has no simple spectrum "
          "(min gap {:.3e}, spread {:.3e}), so its eigenvectors do not determine those of the kernel",
          min_gap, spread)),
      min_gap_(min_gap),
      spread_(spread) {}

DiagonalizationReport diagonalize_via_commuting(const SymmetricMatrix& k, const BandedOperator& m_res,
                                                const DiagonalizationOptions& opts) {
  if (k.size() != m_res.size()) throw std::invalid_argument("diagonalize_via_commuting: size mismatch");
  const SymmetricMatrix m = m_res.to_symmetric(1e-12);
  DiagonalizationReport r;
  r.commutator = commutator_residual(k, m);
  if (r.commutator > opts.max_commutator) {
    throw std::invalid_argument(
        fmt::format("diagonalize_via_commuting: operators do not commute (residual {:.3e})", r.commutator));
  }
  const Spectrum ms = sym_eigen(m);
  r.commuting_spectrum = ms.values;
  r.min_gap = min_spectral_gap(ms.values);
  r.spread = spectral_spread(ms.values);
  if (ms.values.size() > 1 && !(r.min_gap > opts.relative_gap * r.spread)) {
    throw DegenerateSpectrumError(r.min_gap, r.spread);
  }

  const Matrix kd = k.to_dense();
  for (std::size_t i = 0; i < ms.values.size(); ++i) {
    const auto v = ms.vectors.column(i);
    const auto kv = kd * std::span<const double>(v);
    double rq = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) rq += v[j] * kv[j];
    double res = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) res += (kv[j] - rq * v[j]) * (kv[j] - rq * v[j]);
    r.rayleigh.push_back(rq);
    r.max_eigen_residual = std::max(r.max_eigen_residual, std::sqrt(res));
  }
  r.rayleigh_sorted = r.rayleigh;
  std::sort(r.rayleigh_sorted.begin(), r.rayleigh_sorted.end());
  r.direct = sym_eigen(k).values;
  r.multiset_deviation = sorted_difference(r.rayleigh_sorted, r.direct);
  return r;
}

LimitingReport analyze_discrete(const LeonardPair& pair, int j1, int j2) {
  LimitingReport rep;
  rep.family = pair.family;
  rep.j1 = j1;
  rep.j2 = j2;
  const PerlineSolution sol = solve_perline_discrete(pair, j1, j2);
  rep.tau = sol.tau;
  rep.lambda_flag = sol.lambda_flag;
  rep.mu_flag = sol.mu_flag;

  const BandedOperator me = heun_matrix_e(pair, sol.tau);
  const BandedOperator md = heun_matrix_d(pair, sol.tau);
  const Matrix me_dense = me.to_dense();
  const Matrix md_dense = md.to_dense();

  const auto c1 = verify_projector_commutation(me, j1);
  const auto c2 = verify_projector_commutation(md, j2);
  rep.comm_pi1 = c1.dense_residual;
  rep.band_pi1 = c1.band_residual;
  rep.comm_pi2 = c2.dense_residual;
  rep.band_pi2 = c2.band_residual;

  const Matrix u = interbasis_matrix(pair);
  rep.basis_consistency =
      max_abs_difference(u.transpose() * me_dense * u, md_dense) / std::max(max_abs(me_dense), 1e-300);

  const RestrictionOperators v = restriction_operators(pair, j1, j2);
  rep.comm_v1 = commutator_residual(me_dense, v.v1.to_dense());
  rep.comm_v2 = commutator_residual(md_dense, v.v2.to_dense());
  rep.v1_v2_nonzero_spectrum = sorted_difference(sym_eigen(v.v1).values, sym_eigen(v.v2).values);

  const SymmetricMatrix ks = kernel_matrix_sum(pair, j1, j2);
  const SymmetricMatrix kdual = kernel_matrix_dual(pair, j1, j2);
  const SymmetricMatrix kcd = kernel_matrix_cd(pair, j1, j2);
  const SymmetricMatrix block = v.v1.leading_block(static_cast<std::size_t>(j1) + 1);
  rep.kernel_sum_dual = max_abs_difference(ks, kdual);
  rep.kernel_sum_cd = max_abs_difference(ks, kcd);
  rep.kernel_dual_cd = max_abs_difference(kdual, kcd);
  rep.kernel_vs_v1 = max_abs_difference(ks, block);

  const BandedOperator me_res = me.leading_block(static_cast<std::size_t>(j1) + 1);
  const BandedOperator md_res = md.leading_block(static_cast<std::size_t>(j2) + 1);
  rep.restricted_spectrum_e = sym_eigen(me_res.to_symmetric(1e-12)).values;
  rep.restricted_spectrum_d = sym_eigen(md_res.to_symmetric(1e-12)).values;
  rep.gap_e = min_spectral_gap(rep.restricted_spectrum_e);
  rep.spread_e = spectral_spread(rep.restricted_spectrum_e);
  rep.gap_d = min_spectral_gap(rep.restricted_spectrum_d);
  rep.spread_d = spectral_spread(rep.restricted_spectrum_d);

  rep.concentration = sym_eigen(block).values;
  try {
    rep.diagonalization = diagonalize_via_commuting(block, me_res);
  } catch (const DegenerateSpectrumError& e) {
    rep.diagnostic = e.what();
  }
  return rep;
}

}  // namespace heunband
