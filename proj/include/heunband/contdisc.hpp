#pragma once

// Classical orthogonal polynomial families on a half-line or interval:
// truncated kernel matrices by quadrature, the tridiagonal matrix that
// commutes with them, and the matching second-order differential operators.

#include <array>
#include <limits>
#include <string>
#include <vector>

#include "heunband/diffops.hpp"
#include "heunband/leonard.hpp"
#include "heunband/linalg.hpp"

namespace heunband {

enum class FamilyKind { hermite, laguerre, jacobi };

/// Weight ρ and support:
///   hermite   exp(−x²) on (−∞, ∞)
///   laguerre  x^{−α} exp(−x) on [0, ∞), α ≤ 0
///   jacobi    (1 − x)^α (1 + x)^β on [−1, 1], α, β ≥ 0
class ClassicalFamily {
 public:
  FamilyKind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  std::string name() const;

  double support_left() const;   // −∞ for Hermite
  double support_right() const;  // +∞ for Hermite and Laguerre
  double weight(double x) const;
  /// ∫ρ over the whole support.
  double total_mass() const;

  /// Monic-free orthonormal recurrence with n_terms diagonal entries;
  /// p_n = φ_n / √(total_mass) where φ follows the recurrence with φ₀ = 1.
  Recurrence recurrence(std::size_t n_terms) const;
  /// p_0..p_N at x.
  std::vector<double> orthonormal(double x, int N) const;

  double eigenvalue(int n) const;   // Λ_n
  double sigma(int N) const;        // σ_N
  double a_constant(int N) const;   // A_N

  /// D with D p_n = Λ_n p_n.
  DiffOperator polynomial_operator() const;
  /// Leading factor q(x) of D = (1/ρ) d/dx (q ρ d/dx).
  Polynomial leading_factor() const;
  /// Constant added to the identity part of the commuting operator.
  double identity_shift() const;

  friend ClassicalFamily make_family(FamilyKind kind, double alpha, double beta);

 private:
  FamilyKind kind_ = FamilyKind::hermite;
  double alpha_ = 0.0;
  double beta_ = 0.0;
};

/// Throws std::invalid_argument outside the supported parameter ranges.
ClassicalFamily make_family(FamilyKind kind, double alpha = 0.0, double beta = 0.0);
FamilyKind parse_family_kind(const std::string& name);
const char* to_string(FamilyKind kind);

struct KernelMatrixQ {
  SymmetricMatrix k;
  double error_estimate = 0.0;  // last entrywise Cauchy difference
  double lower_limit = 0.0;     // actual left end used (truncated for Hermite)
  int panels = 0;
  bool converged = false;
};

struct QuadratureOptions {
  double tolerance = 1e-11;
  int max_levels = 14;
};

/// K_ij = ∫_{left}^{W} ρ p_i p_j on composite 32-point Gauss–Legendre panels,
/// halving every panel until two successive estimates agree entrywise.
/// W may equal a finite right end of the support. Throws
/// std::invalid_argument when W lies outside the support.
KernelMatrixQ kernel_matrix_quadrature(const ClassicalFamily& family, int N, double W,
                                       const QuadratureOptions& opts = {});

/// max |∫ρ p_i p_j − δ_ij| over the whole support, i, j ≤ N.
double orthonormality_residual(const ClassicalFamily& family, int N);

/// T = ½{L_N, Λ_N} − W Λ_N + σ L_N with L_N the truncated recurrence matrix.
SymmetricMatrix commuting_matrix(const ClassicalFamily& family, int N, double W);
SymmetricMatrix commuting_matrix(const ClassicalFamily& family, int N, double W, double sigma);

struct SigmaFit {
  double sigma = 0.0;
  double table = 0.0;
  bool degenerate = false;
};
/// σ minimizing ‖[½{L,Λ} − WΛ + σL, K]‖_F.
SigmaFit fit_sigma(const ClassicalFamily& family, int N, double W, const SymmetricMatrix& k);

/// Residual of s1{L,ω} + s2 L + s3 ω + s4 = ∂(T²−x²)∂ − W²x² with L = −∂², ω = x².
double prolate_identity_residual(double T, double W, const std::array<double, 4>& s);
bool verify_prolate_identity(double T, double W, double tol = 1e-12);
DiffOperator prolate_operator(double T, double W);

/// Residual of s1{L,ω} + s2 L + s3 ω + s4 = −∂(G²−x²)∂ + T²x² + G²(ν²−1/4)/x²
/// with L = −∂² + (ν²−1/4)/x², ω = x².
double bessel_identity_residual(double G, double T, double nu, const std::array<double, 4>& s);
bool verify_bessel_identity(double G, double T, double nu, double tol = 1e-12);
DiffOperator bessel_operator(double G, double T, double nu);

struct TildeDReport {
  DiffOperator tilde_d;          // ½{D,X} − W D + σ_N X + c I
  BoundaryCheck boundary_at_w;
  double leading_at_w = 0.0;
  /// Difference of ˜D and (x − W)D + q∂ + A_N x in the two derivative
  /// orders; the identity parts differ by `constant_offset`.
  double divergence_mismatch = 0.0;
  double constant_offset = 0.0;
  double a_n = 0.0;
  bool passed = false;
};
TildeDReport verify_tilde_d(const ClassicalFamily& family, int N, double W);

struct ContDiscReport {
  std::string family;
  int N = 0;
  double W = 0.0;
  KernelMatrixQ kernel;
  double sigma_table = 0.0;
  SigmaFit fit;
  double comm_tk = 0.0;            // relative ‖[T, K]‖
  double offdiag_in_t_basis = 0.0; // max off-diagonal of VᵀKV / max|K|
  double kernel_spectrum_min = 0.0;
  double kernel_spectrum_max = 0.0;
  std::vector<double> t_spectrum;
  double t_gap = 0.0;
  std::vector<double> concentration;  // ascending eigenvalues of K
  TildeDReport tilde_d;
};

ContDiscReport analyze_contdisc(const ClassicalFamily& family, int N, double W);

}  // namespace heunband
