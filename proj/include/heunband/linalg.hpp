#pragma once

// Dense and banded real linear algebra used by every other module:
// a cyclic Jacobi eigensolver for symmetric matrices, commutator norms
// and spectral-gap helpers.

#include <cstddef>
#include <span>
#include <vector>

namespace heunband {

/// Row-major dense real matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> d);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> data() const { return data_; }

  Matrix transpose() const;
  Matrix block(std::size_t row0, std::size_t col0, std::size_t nrows, std::size_t ncols) const;
  std::vector<double> column(std::size_t j) const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(double s, Matrix a);
Matrix operator*(const Matrix& a, const Matrix& b);
std::vector<double> operator*(const Matrix& a, std::span<const double> v);

double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);
double max_abs_difference(const Matrix& a, const Matrix& b);

Matrix commutator(const Matrix& a, const Matrix& b);
Matrix anticommutator(const Matrix& a, const Matrix& b);

/// ‖AB − BA‖_F / (‖A‖_F ‖B‖_F). When a norm is below 1e-30 the
/// unnormalized commutator norm is returned instead.
double commutator_residual(const Matrix& a, const Matrix& b);

/// Solves A x = b by Gaussian elimination with partial pivoting. Throws
/// std::invalid_argument when A is singular to working precision.
std::vector<double> solve_linear(Matrix a, std::vector<double> b);

/// Least-squares solution of A x ≈ b (rows ≥ cols) by Householder QR.
std::vector<double> least_squares(Matrix a, std::vector<double> b);

/// Symmetric matrix in packed lower-triangle storage.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(std::size_t n);

  /// Throws std::invalid_argument if `a` is not square or if
  /// max|a − aᵀ| exceeds tol·max|a|. The stored value is the average.
  static SymmetricMatrix from_dense(const Matrix& a, double tol = 0.0);

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return packed_[index(i, j)]; }
  double& operator()(std::size_t i, std::size_t j) { return packed_[index(i, j)]; }

  Matrix to_dense() const;
  SymmetricMatrix leading_block(std::size_t k) const;

 private:
  static std::size_t index(std::size_t i, std::size_t j) {
    return i >= j ? i * (i + 1) / 2 + j : j * (j + 1) / 2 + i;
  }
  std::size_t n_ = 0;
  std::vector<double> packed_;
};

double frobenius_norm(const SymmetricMatrix& a);
double commutator_residual(const SymmetricMatrix& a, const SymmetricMatrix& b);

/// Eigenpairs of a symmetric matrix. `vectors` holds unit eigenvectors as
/// columns aligned with the ascending `values`.
struct Spectrum {
  std::vector<double> values;
  Matrix vectors;
};

/// Cyclic Jacobi rotations with a fixed row-by-row sweep order, so repeated
/// calls on identical input give identical output. Each eigenvector is
/// scaled so its first component above 1e-12 in magnitude is positive.
/// Throws std::invalid_argument on non-finite entries.
Spectrum sym_eigen(const SymmetricMatrix& a);

/// Smallest distance between neighbours of the sorted values; +inf when
/// fewer than two values are given (no gap exists).
double min_spectral_gap(std::span<const double> values);

/// max − min of the values, 0 for an empty sequence.
double spectral_spread(std::span<const double> values);

/// Square matrix whose nonzero entries lie within `bandwidth` of the
/// diagonal. Diagonals with offsets −bandwidth..bandwidth are stored
/// explicitly; the operator is not required to be symmetric, because the
/// general Heun combination with τ₁ ≠ τ₂ is not.
class BandedOperator {
 public:
  BandedOperator() = default;
  BandedOperator(std::size_t n, std::size_t bandwidth);

  /// Symmetric tridiagonal operator from its diagonal (length n) and
  /// off-diagonal (length n − 1).
  static BandedOperator tridiagonal(std::span<const double> diag, std::span<const double> off);
  static BandedOperator diagonal(std::span<const double> diag);

  /// Throws std::invalid_argument when an entry outside the band exceeds
  /// tol·max|a|.
  static BandedOperator from_dense(const Matrix& a, std::size_t bandwidth, double tol = 0.0);

  std::size_t size() const { return n_; }
  std::size_t bandwidth() const { return bandwidth_; }

  /// Entry (i, j); zero outside the band.
  double operator()(std::size_t i, std::size_t j) const;
  /// Throws std::out_of_range outside the band.
  void set(std::size_t i, std::size_t j, double value);

  /// Entries (i, i + offset), length n − |offset|.
  std::span<const double> diagonal_at(long offset) const;

  Matrix to_dense() const;
  BandedOperator leading_block(std::size_t k) const;
  bool is_symmetric(double tol = 0.0) const;
  SymmetricMatrix to_symmetric(double tol = 0.0) const;

  /// Largest |i − j| with |a_ij| > tol·max|a|.
  std::size_t effective_bandwidth(double tol = 0.0) const;

 private:
  std::size_t n_ = 0;
  std::size_t bandwidth_ = 0;
  std::vector<std::vector<double>> diagonals_;  // offset k at index k + bandwidth
};

}  // namespace heunband
