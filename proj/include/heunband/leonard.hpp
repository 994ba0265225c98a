#pragma once

// Finite Leonard pairs built from orthonormal three-term recurrences.
//
// Off-diagonal sequences are stored with length N + 1 and a leading zero,
// so index n holds the coupling between rows n − 1 and n.

#include <span>
#include <string>
#include <vector>

#include "heunband/linalg.hpp"

namespace heunband {

/// Orthonormal recurrence a_{n+1}p_{n+1} = (x − b_n)p_n − a_n p_{n−1}.
/// `a[0]` is unused and kept at zero.
struct Recurrence {
  std::vector<double> a;
  std::vector<double> b;

  std::size_t size() const { return b.size(); }
  /// Symmetric tridiagonal matrix with diagonal b and off-diagonal a[1..].
  BandedOperator jacobi_matrix() const;
};

struct LeonardPair {
  std::string family;
  std::vector<double> lambda;  // spectrum of L (e-basis diagonal)
  std::vector<double> xi;      // off-diagonal of Z in the e-basis, xi[0] = 0
  std::vector<double> eta;     // diagonal of Z in the e-basis
  std::vector<double> mu;      // spectrum of Z (d-basis diagonal)
  std::vector<double> a;       // off-diagonal of L in the d-basis, a[0] = 0
  std::vector<double> b;       // diagonal of L in the d-basis

  std::size_t size() const { return lambda.size(); }
  std::size_t degree() const { return lambda.size() - 1; }
  /// Recurrence of the polynomials φ_n evaluated on lambda.
  Recurrence phi() const { return {a, b}; }
  /// Recurrence of the dual polynomials χ_s evaluated on mu.
  Recurrence chi() const { return {xi, eta}; }
};

LeonardPair make_krawtchouk(int N, double p);
LeonardPair make_hahn(int N, double alpha, double beta);
LeonardPair make_anti_krawtchouk(int N);

/// Structural checks on a constructed pair. Spectrum errors compare sorted
/// eigenvalues of the tridiagonal matrices with the sorted diagonals.
struct LeonardInvariants {
  bool couplings_nonzero = false;
  bool spectra_distinct = false;
  double phi_spectrum_error = 0.0;  // eig tridiag(a, b) vs lambda
  double chi_spectrum_error = 0.0;  // eig tridiag(xi, eta) vs mu
};
LeonardInvariants check_leonard_invariants(const LeonardPair& pair);

/// φ_0..φ_{up_to} at x with φ_0 = 1. Requires up_to < rec.size().
std::vector<double> eval_orthonormal(const Recurrence& rec, double x, std::size_t up_to);

struct PolynomialValues {
  std::vector<double> value;
  std::vector<double> slope;
};
/// Values and first derivatives from the differentiated recurrence.
PolynomialValues eval_orthonormal_with_derivative(const Recurrence& rec, double x,
                                                  std::size_t up_to);

/// a_{n+1}φ_{n+1}(x) = (x − b_n)φ_n(x) − a_nφ_{n−1}(x), usable at n = size − 1
/// where a_{n+1} is not part of the data.
double scaled_next(const Recurrence& rec, double x, std::size_t n, std::span<const double> phi);

struct GridWeights {
  std::vector<double> nodes;    // ascending eigenvalues of the Jacobi matrix
  std::vector<double> weights;  // squared first eigenvector components
};

/// Golub–Welsch weights. Throws std::invalid_argument when the spectrum is
/// not simple.
GridWeights grid_weights(const Recurrence& rec);

/// w(x) = 1 / Σ_n φ_n(x)², evaluated at each node.
std::vector<double> christoffel_weights(const Recurrence& rec, std::span<const double> nodes);

/// Orthogonal matrix U(s, n) = ⟨e_s, d_n⟩ = τ_s √w_s φ_n(λ_s). The row signs
/// τ_s make U diag(mu) Uᵀ reproduce the signs of xi.
Matrix interbasis_matrix(const LeonardPair& pair);

/// max_{s,n} |√w_s φ_n(λ_s) − √w̃_n χ_s(μ_n)| after choosing row and column
/// signs that best align the two matrices.
double duality_residual(const LeonardPair& pair);

/// Relative Christoffel–Darboux residual at (x, y) for index n:
/// Σ_{k≤n} φ_k(x)φ_k(y) against a_{n+1}(φ_{n+1}(x)φ_n(y) − φ_{n+1}(y)φ_n(x))/(x − y).
double christoffel_darboux_residual(const Recurrence& rec, double x, double y, std::size_t n);

enum class Identifiability { identifiable, degenerate };

/// λ_n + λ_{n+1} for consecutive entries.
std::vector<double> consecutive_sums(std::span<const double> spectrum);

/// Identifiable iff the consecutive sums are pairwise distinct after rounding
/// to 12 significant digits relative to the largest sum. Throws
/// std::invalid_argument for fewer than 3 values.
Identifiability perline_degeneracy_check(std::span<const double> spectrum);

const char* to_string(Identifiability id);

}  // namespace heunband
