#include "heunband/heun.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace heunband {

namespace {

void require_nontrivial(const HeunCoefficients& t) {
  if (t.tau1 == 0.0 && t.tau2 == 0.0 && t.tau3 == 0.0 && t.tau4 == 0.0) {
    throw std::invalid_argument("HeunCoefficients: tau1..tau4 are all zero");
  }
}

TridiagCoefficients band_entries(std::span<const double> diag, std::span<const double> off,
                                 std::span<const double> off_diag_of_tri, double t1, double t2,
                                 double t_diag, double t_tri, double t0) {
  // Shared shape of both bases: D diagonal with values `diag`, T tridiagonal
  // with off-diagonal `off` and diagonal `off_diag_of_tri`;
  // M = t1·D·T + t2·T·D + t_diag·D + t_tri·T + t0.
  const std::size_t n = diag.size();
  TridiagCoefficients c;
  c.lower.assign(n, 0.0);
  c.upper.assign(n, 0.0);
  c.diag.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    c.diag[k] = (t1 + t2) * off_diag_of_tri[k] * diag[k] + t_diag * diag[k] +
                t_tri * off_diag_of_tri[k] + t0;
    if (k > 0) {
      c.lower[k] = (t1 * diag[k] + t2 * diag[k - 1] + t_tri) * off[k];
      c.upper[k] = (t1 * diag[k - 1] + t2 * diag[k] + t_tri) * off[k];
    }
  }
  return c;
}

}  // namespace

BandedOperator assemble_heun_matrix(std::span<const double> l_diag, const BandedOperator& z_tri,
                                    const HeunCoefficients& tau) {
  require_nontrivial(tau);
  if (l_diag.size() != z_tri.size()) {
    throw std::invalid_argument("assemble_heun_matrix: size mismatch");
  }
  const Matrix l = Matrix::diagonal(l_diag);
  const Matrix z = z_tri.to_dense();
  Matrix m = tau.tau1 * (l * z) + tau.tau2 * (z * l) + tau.tau3 * l + tau.tau4 * z +
             tau.tau0 * Matrix::identity(l_diag.size());
  return BandedOperator::from_dense(m, 1);
}

TridiagCoefficients heun_tridiag_coeffs_e(const LeonardPair& pair, const HeunCoefficients& tau) {
  return band_entries(pair.lambda, pair.xi, pair.eta, tau.tau1, tau.tau2, tau.tau3, tau.tau4,
                      tau.tau0);
}

TridiagCoefficients heun_tridiag_coeffs_d(const LeonardPair& pair, const HeunCoefficients& tau) {
  // Here Z is diagonal, so LZ = T·D and ZL = D·T.
  return band_entries(pair.mu, pair.a, pair.b, tau.tau2, tau.tau1, tau.tau4, tau.tau3, tau.tau0);
}

BandedOperator heun_matrix_e(const LeonardPair& pair, const HeunCoefficients& tau) {
  return assemble_heun_matrix(pair.lambda, pair.chi().jacobi_matrix(), tau);
}

BandedOperator heun_matrix_d(const LeonardPair& pair, const HeunCoefficients& tau) {
  const HeunCoefficients swapped{tau.tau0, tau.tau2, tau.tau1, tau.tau4, tau.tau3};
  return assemble_heun_matrix(pair.mu, pair.phi().jacobi_matrix(), swapped);
}

PerlineSolution solve_perline_discrete(const LeonardPair& pair, int j1, int j2) {
  const int N = static_cast<int>(pair.degree());
  if (j1 < 0 || j1 > N - 1 || j2 < 0 || j2 > N - 1) {
    throw std::out_of_range("solve_perline_discrete: cutoff outside 0..N-1");
  }
  PerlineSolution s;
  s.tau.tau1 = 1.0;
  s.tau.tau2 = 1.0;
  s.tau.tau4 = -(pair.lambda[j1] + pair.lambda[j1 + 1]);
  s.tau.tau3 = -(pair.mu[j2] + pair.mu[j2 + 1]);
  s.tau.tau0 = 0.0;
  s.lambda_flag = perline_degeneracy_check(pair.lambda);
  s.mu_flag = perline_degeneracy_check(pair.mu);
  return s;
}

ContinuousPerline solve_perline_continuous(double phi_alpha, std::optional<double> phi_beta) {
  ContinuousPerline out;
  out.tau.tau1 = 1.0;
  out.tau.tau2 = 1.0;
  out.tau.tau3 = -2.0 * phi_alpha;
  if (phi_beta) {
    const double scale = std::max({1.0, std::abs(phi_alpha), std::abs(*phi_beta)});
    out.endpoint_mismatch = std::abs(*phi_beta - phi_alpha) / scale;
    out.feasible = out.endpoint_mismatch <= 1e-12;
  }
  return out;
}

HeunOdeParams heun_ode_params(double nu1, double nu2, const HeunCoefficients& tau, double lambda) {
  const double total = tau.tau1 + tau.tau2;
  if (total == 0.0) throw std::invalid_argument("heun_ode_params: tau1 + tau2 = 0");
  const double t2 = tau.tau2 / total;
  const double t3 = tau.tau3 / total;
  const double t4 = tau.tau4 / total;
  HeunOdeParams p;
  p.gamma = nu2;
  p.delta = -nu1 - nu2;
  p.epsilon = 2.0 * t2;
  p.d = -t4;
  p.alphabeta = -t3 - nu1 * t2;
  p.q = lambda - t2 * nu2;
  return p;
}

}  // namespace heunband
