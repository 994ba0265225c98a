#pragma once

// Anti-spin representation behind the anti-Krawtchouk polynomials, and the
// operators that commute with both of its band and time projectors.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "heunband/leonard.hpp"
#include "heunband/limiting.hpp"
#include "heunband/linalg.hpp"

namespace heunband {

/// L1 tridiagonal, L2 = diag(x_n) with x_n = (−1)^n (n + 1/2), L3 = {L1, L2}.
struct AntiSpinRep {
  int N = 0;
  std::vector<double> x;
  std::vector<double> a;  // a[0] = 0
  std::vector<double> b;
  Matrix l1;
  Matrix l2;
  Matrix l3;
};

/// Throws std::invalid_argument for odd or negative N.
AntiSpinRep make_antispin(int N);

struct AntiSpinCheck {
  double rel_l1l2 = 0.0;   // ‖{L1,L2} − L3‖ / ‖L3‖
  double rel_l2l3 = 0.0;   // ‖{L2,L3} − L1‖ / ‖L1‖
  double rel_l3l1 = 0.0;   // ‖{L3,L1} − L2‖ / ‖L2‖
  double casimir_expected = 0.0;  // (N + 1/2)(N + 3/2)
  double casimir_scalar = 0.0;    // mean diagonal of L1² + L2² + L3²
  double casimir_residual = 0.0;  // ‖Q − expected·I‖ / expected
};
AntiSpinCheck check_antispin(const AntiSpinRep& rep);

struct PentaCoefficients {
  std::array<double, 6> alpha{};
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double conditions_residual = 0.0;  // largest relative residual of the six conditions
};

/// κ = 2J² + 4J + 5/2
double penta_kappa(int cutoff);

/// Solves the six linear commutation conditions. Requires
/// 1 ≤ N1, N2 ≤ N − 2; throws std::out_of_range otherwise.
PentaCoefficients solve_penta_coeffs(int N, int n1, int n2);

/// Residuals of the six conditions for arbitrary α, relative to the size of
/// the terms in each equation.
std::array<double, 6> penta_conditions(int N, int n1, int n2, const std::array<double, 6>& alpha);

/// {L1², L2²} + α₁{L1², L2} + α₂{L2², L1} + α₃L1² + α₄L2² + α₅L1 + α₆L2.
BandedOperator assemble_penta_direct(const AntiSpinRep& rep, const std::array<double, 6>& alpha);

/// g[n] = M(n, n−2) and f[n] = M(n, n−1) from the closed forms, n ≥ 2;
/// entries below 2 are left at zero.
struct PentaBand {
  std::vector<double> g;
  std::vector<double> f;
};
PentaBand penta_band_coeffs(const AntiSpinRep& rep, const std::array<double, 6>& alpha);

/// Largest |closed form − direct assembly| over n ≥ 2.
double penta_band_mismatch(const AntiSpinRep& rep, const std::array<double, 6>& alpha);

enum class AlternativeForm { corrected, as_printed };

/// 2L₂L₁²L₂ + (−1)^{N1+1}{L₂, L₁²} + (−1)^{N2+1}{L₂², L₁} ∓ c₂L₂²
/// + (−1)^{N1}(c₂ + 1)L₂ − c₁L₁² + (−1)^{N2}(c₁ + 3)L₁ with
/// c₂ = (2N₂+1)(2N₂+3)/2 and c₁ = (4N₁²+8N₁−1)/2. The corrected form uses
/// −c₂ on L₂², which is what commutation with the second projector needs.
BandedOperator alternative_M(const AntiSpinRep& rep, int n1, int n2,
                             AlternativeForm form = AlternativeForm::corrected);

/// {L, Z} + τ₃L + τ₄Z with L = L2, Z = L1 and the bilinear cutoff choice.
BandedOperator bilinear_perline_M(const AntiSpinRep& rep, int n1, int n2);

/// Interbasis matrix from the basis diagonalizing L2 to the one diagonalizing L1.
Matrix antispin_interbasis(const AntiSpinRep& rep);

struct PentaVerification {
  double comm_e = 0.0;  // [M, π_{N1}] in the L2-diagonal basis
  double comm_d = 0.0;  // [M, π_{N2}] in the L1-diagonal basis
  std::vector<double> spectrum_e;
  std::vector<double> spectrum_d;
  double gap_e = 0.0;
  double spread_e = 0.0;
  double gap_d = 0.0;
  double spread_d = 0.0;
  bool simple_e = false;
  bool simple_d = false;
};

/// Commutators in both bases and restricted-block spectra. A block is simple
/// when its min gap exceeds 1e-8 × spread.
PentaVerification verify_penta(const AntiSpinRep& rep, const BandedOperator& m, int n1, int n2);

struct Degree4Fit {
  std::string name;
  std::array<double, 8> coefficients{};  // over {L1²,L2²}, {L1²,L2}, {L2²,L1}, L1², L2², L1, L2, I
  double relative_residual = 0.0;
};

/// Expresses L2L1²L2, L1L2²L1 and (L1L2)² + (L2L1)² through {L1², L2²} and
/// lower-degree terms by least squares.
std::vector<Degree4Fit> degree4_dependence(const AntiSpinRep& rep);

enum class AntiAnsatz { penta, alternative, alternative_printed, bilinear };

struct AntiKrawReport {
  int N = 0;
  int n1 = 0;
  int n2 = 0;
  AntiAnsatz ansatz = AntiAnsatz::penta;
  AntiSpinCheck algebra;
  std::optional<PentaCoefficients> coefficients;
  double band_mismatch = 0.0;
  PentaVerification verification;
  double comm_v1 = 0.0;
  double comm_v2 = 0.0;
  std::vector<double> concentration;
  std::optional<DiagonalizationReport> diagonalization;
  std::string diagnostic;
};

AntiKrawReport analyze_antikraw(int N, int n1, int n2, AntiAnsatz ansatz);

const char* to_string(AntiAnsatz a);
/// Throws std::invalid_argument for unknown names.
AntiAnsatz parse_anti_ansatz(const std::string& name);

}  // namespace heunband
