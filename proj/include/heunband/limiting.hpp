#pragma once

// Band and time limiting for a finite Leonard pair: projectors, the
// restriction operators V₁ = π₁π₂π₁ and V₂ = π₂π₁π₂, three independent
// forms of the restricted kernel, and diagonalization of that kernel
// through the commuting tridiagonal operator.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "heunband/heun.hpp"
#include "heunband/leonard.hpp"
#include "heunband/linalg.hpp"

namespace heunband {

/// Orthogonal projector onto the first cutoff + 1 basis vectors.
struct Projector {
  std::size_t size = 0;
  std::size_t cutoff = 0;
  Matrix matrix() const;
};

Projector make_projector(std::size_t size, int cutoff);

struct RestrictionOperators {
  SymmetricMatrix v1;  // π₁π₂π₁ in the e-basis
  SymmetricMatrix v2;  // π₂π₁π₂ in the d-basis
};

/// Built from exact projector products conjugated through the interbasis
/// matrix. Throws std::out_of_range for cutoffs outside 0..N.
RestrictionOperators restriction_operators(const LeonardPair& pair, int j1, int j2);

/// K(t, n) = Σ_{s≤J2} √(w_t w_n) φ_s(λ_t) φ_s(λ_n), t, n ≤ J1, with the
/// interbasis gauge signs applied so the result equals the leading block of V₁.
SymmetricMatrix kernel_matrix_sum(const LeonardPair& pair, int j1, int j2);
/// K(t, n) = Σ_{s≤J2} w̃_s χ_t(μ_s) χ_n(μ_s).
SymmetricMatrix kernel_matrix_dual(const LeonardPair& pair, int j1, int j2);
/// Christoffel–Darboux quotient off the diagonal, derivative form on it.
SymmetricMatrix kernel_matrix_cd(const LeonardPair& pair, int j1, int j2);

struct ProjectorCommutation {
  double band_residual = 0.0;   // max(|M(J+1,J)|, |M(J,J+1)|) / largest off-diagonal
  double dense_residual = 0.0;  // commutator_residual(M, π)
};
ProjectorCommutation verify_projector_commutation(const BandedOperator& m, int cutoff);

class DegenerateSpectrumError : public std::runtime_error {
 public:
  DegenerateSpectrumError(double min_gap, double spread);
  double min_gap() const { return min_gap_; }
  double spread() const { return spread_; }

 private:
  double min_gap_;
  double spread_;
};

struct DiagonalizationOptions {
  double max_commutator = 1e-8;   // required [Mres, K] relative residual
  double relative_gap = 1e-8;     // min gap must exceed this × spread
};

struct DiagonalizationReport {
  std::vector<double> rayleigh;           // v_iᵀ K v_i in order of ascending Mres eigenvalues
  std::vector<double> rayleigh_sorted;
  std::vector<double> direct;             // sym_eigen(K), ascending
  std::vector<double> commuting_spectrum; // eigenvalues of Mres
  double multiset_deviation = 0.0;        // max |sorted rayleigh − direct|
  double max_eigen_residual = 0.0;        // max ‖K v − (vᵀKv) v‖
  double commutator = 0.0;
  double min_gap = 0.0;
  double spread = 0.0;
};

/// Throws DegenerateSpectrumError when Mres has a repeated eigenvalue and
/// std::invalid_argument when Mres and K do not commute or sizes differ.
DiagonalizationReport diagonalize_via_commuting(const SymmetricMatrix& k, const BandedOperator& m_res,
                                                const DiagonalizationOptions& opts = {});

struct LimitingReport {
  std::string family;
  int j1 = 0;
  int j2 = 0;
  HeunCoefficients tau;
  Identifiability lambda_flag = Identifiability::identifiable;
  Identifiability mu_flag = Identifiability::identifiable;

  double comm_pi1 = 0.0;
  double comm_pi2 = 0.0;
  double band_pi1 = 0.0;
  double band_pi2 = 0.0;
  double comm_v1 = 0.0;
  double comm_v2 = 0.0;
  double kernel_sum_dual = 0.0;
  double kernel_sum_cd = 0.0;
  double kernel_dual_cd = 0.0;
  double kernel_vs_v1 = 0.0;
  double basis_consistency = 0.0;  // ‖Uᵀ M_e U − M_d‖ / ‖M_e‖
  double v1_v2_nonzero_spectrum = 0.0;

  double gap_e = 0.0;
  double spread_e = 0.0;
  double gap_d = 0.0;
  double spread_d = 0.0;
  std::vector<double> restricted_spectrum_e;
  std::vector<double> restricted_spectrum_d;

  std::vector<double> concentration;  // eigenvalues of V₁'s leading block, ascending
  std::optional<DiagonalizationReport> diagonalization;
  std::string diagnostic;  // refusal message when diagonalization was refused
};

/// Perline coefficients, commutation checks, kernels and the diagonalization
/// cross-check for one configuration.
LimitingReport analyze_discrete(const LeonardPair& pair, int j1, int j2);

}  // namespace heunband
