#pragma once

// Algebraic Heun operator M = τ₁LZ + τ₂ZL + τ₃L + τ₄Z + τ₀I for a Leonard
// pair, its tridiagonal entries in both bases, and the coefficient choices
// that make M commute with the band and time projectors.

#include <optional>
#include <span>
#include <vector>

#include "heunband/leonard.hpp"
#include "heunband/linalg.hpp"

namespace heunband {

struct HeunCoefficients {
  double tau0 = 0.0;
  double tau1 = 0.0;
  double tau2 = 0.0;
  double tau3 = 0.0;
  double tau4 = 0.0;
};

/// M from the diagonal of L and tridiagonal Z by dense matrix arithmetic.
/// Throws std::invalid_argument on size mismatch or when τ₁..τ₄ all vanish.
BandedOperator assemble_heun_matrix(std::span<const double> l_diag, const BandedOperator& z_tri,
                                    const HeunCoefficients& tau);

/// Band entries of a tridiagonal operator: lower[n] = M(n, n−1),
/// upper[n] = M(n−1, n) for n ≥ 1 (index 0 unused), diag[n] = M(n, n).
struct TridiagCoefficients {
  std::vector<double> lower;
  std::vector<double> diag;
  std::vector<double> upper;
};

/// Closed-form entries in the basis where L is diagonal.
TridiagCoefficients heun_tridiag_coeffs_e(const LeonardPair& pair, const HeunCoefficients& tau);
/// Closed-form entries in the basis where Z is diagonal.
TridiagCoefficients heun_tridiag_coeffs_d(const LeonardPair& pair, const HeunCoefficients& tau);

BandedOperator heun_matrix_e(const LeonardPair& pair, const HeunCoefficients& tau);
BandedOperator heun_matrix_d(const LeonardPair& pair, const HeunCoefficients& tau);

struct PerlineSolution {
  HeunCoefficients tau;
  Identifiability lambda_flag = Identifiability::identifiable;
  Identifiability mu_flag = Identifiability::identifiable;
};

/// τ₁ = τ₂ = 1, τ₄ = −(λ_{J1} + λ_{J1+1}), τ₃ = −(μ_{J2} + μ_{J2+1}), τ₀ = 0.
/// Throws std::out_of_range unless 0 ≤ J1, J2 ≤ N − 1.
PerlineSolution solve_perline_discrete(const LeonardPair& pair, int j1, int j2);

struct ContinuousPerline {
  HeunCoefficients tau;  // τ₄ and τ₀ are unconstrained and returned as 0
  bool feasible = true;
  double endpoint_mismatch = 0.0;  // |φ(β) − φ(α)| relative, two-endpoint case
};

/// τ₁ = τ₂ = 1, τ₃ = −2φ(α). With a second endpoint the problem is feasible
/// only when φ(β) = φ(α) to 1e-12 relative.
ContinuousPerline solve_perline_continuous(double phi_alpha,
                                           std::optional<double> phi_beta = std::nullopt);

struct HeunOdeParams {
  double gamma = 0.0;
  double delta = 0.0;
  double epsilon = 0.0;
  double d = 0.0;
  double alphabeta = 0.0;
  double q = 0.0;
};

/// Parameters of the Heun equation after rescaling τ so that τ₁ + τ₂ = 1.
/// Throws std::invalid_argument when τ₁ + τ₂ = 0.
HeunOdeParams heun_ode_params(double nu1, double nu2, const HeunCoefficients& tau, double lambda);

}  // namespace heunband
