#include "heunband/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace heunband {

namespace {

constexpr double kTinyNorm = 1e-30;

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch");
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> d) {
  Matrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix Matrix::block(std::size_t row0, std::size_t col0, std::size_t nrows,
                     std::size_t ncols) const {
  if (row0 + nrows > rows_ || col0 + ncols > cols_) {
    throw std::out_of_range("Matrix::block: block exceeds matrix");
  }
  Matrix b(nrows, ncols);
  for (std::size_t i = 0; i < nrows; ++i)
    for (std::size_t j = 0; j < ncols; ++j) b(i, j) = (*this)(row0 + i, col0 + j);
  return b;
}

std::vector<double> Matrix::column(std::size_t j) const {
  std::vector<double> c(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

Matrix& Matrix::operator+=(const Matrix& other) {
  require_same_shape(*this, other, "Matrix::operator+=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  require_same_shape(*this, other, "Matrix::operator-=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (auto& v : data_) v *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("Matrix product: inner size mismatch");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

std::vector<double> operator*(const Matrix& a, std::span<const double> v) {
  if (a.cols() != v.size()) throw std::invalid_argument("Matrix-vector product: size mismatch");
  std::vector<double> out(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out[i] += a(i, j) * v[j];
  return out;
}

double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

double max_abs_difference(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "max_abs_difference");
  double m = 0.0;
  for (std::size_t k = 0; k < a.data().size(); ++k)
    m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
  return m;
}

Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }
Matrix anticommutator(const Matrix& a, const Matrix& b) { return a * b + b * a; }

double commutator_residual(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "commutator_residual");
  if (!a.square()) throw std::invalid_argument("commutator_residual: matrices must be square");
  const double c = frobenius_norm(commutator(a, b));
  const double scale = frobenius_norm(a) * frobenius_norm(b);
  if (scale < kTinyNorm) return c;
  return c / scale;
}

SymmetricMatrix::SymmetricMatrix(std::size_t n) : n_(n), packed_(n * (n + 1) / 2, 0.0) {}

SymmetricMatrix SymmetricMatrix::from_dense(const Matrix& a, double tol) {
  if (!a.square()) throw std::invalid_argument("SymmetricMatrix: matrix must be square");
  const double scale = max_abs(a);
  SymmetricMatrix s(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      if (std::abs(a(i, j) - a(j, i)) > tol * scale) {
        throw std::invalid_argument("SymmetricMatrix: input is not symmetric");
      }
      s(i, j) = 0.5 * (a(i, j) + a(j, i));
    }
  }
  return s;
}

Matrix SymmetricMatrix::to_dense() const {
  Matrix m(n_, n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) m(i, j) = (*this)(i, j);
  return m;
}

SymmetricMatrix SymmetricMatrix::leading_block(std::size_t k) const {
  if (k > n_) throw std::out_of_range("SymmetricMatrix::leading_block: block exceeds matrix");
  SymmetricMatrix b(k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j <= i; ++j) b(i, j) = (*this)(i, j);
  return b;
}

double frobenius_norm(const SymmetricMatrix& a) { return frobenius_norm(a.to_dense()); }

double commutator_residual(const SymmetricMatrix& a, const SymmetricMatrix& b) {
  if (a.size() != b.size()) throw std::invalid_argument("commutator_residual: size mismatch");
  return commutator_residual(a.to_dense(), b.to_dense());
}

Spectrum sym_eigen(const SymmetricMatrix& input) {
  const std::size_t n = input.size();
  Matrix a = input.to_dense();
  for (double v : a.data()) {
    if (!std::isfinite(v)) throw std::invalid_argument("sym_eigen: non-finite entry");
  }
  Matrix v = Matrix::identity(n);

  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off == 0.0) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        const double app = a(p, p);
        const double aqq = a(q, q);
        // Negligible against both diagonal entries: drop it.
        if (sweep > 3 && std::abs(app) + 100.0 * std::abs(apq) == std::abs(app) &&
            std::abs(aqq) + 100.0 * std::abs(apq) == std::abs(aqq)) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        if (apq == 0.0) continue;

        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;

        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });

  Spectrum out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t col = 0; col < n; ++col) {
    const std::size_t src = order[col];
    out.values[col] = a(src, src);
    double sign = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (std::abs(v(k, src)) > 1e-12) {
        sign = v(k, src) > 0.0 ? 1.0 : -1.0;
        break;
      }
    }
    for (std::size_t k = 0; k < n; ++k) out.vectors(k, col) = sign * v(k, src);
  }
  return out;
}

double min_spectral_gap(std::span<const double> values) {
  if (values.size() < 2) return std::numeric_limits<double>::infinity();
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < sorted.size(); ++i) gap = std::min(gap, sorted[i] - sorted[i - 1]);
  return gap;
}

double spectral_spread(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return *hi - *lo;
}

BandedOperator::BandedOperator(std::size_t n, std::size_t bandwidth)
    : n_(n), bandwidth_(bandwidth), diagonals_(2 * bandwidth + 1) {
  if (n == 0) throw std::invalid_argument("BandedOperator: size must be positive");
  if (bandwidth >= n && n > 0) bandwidth_ = n - 1, diagonals_.resize(2 * bandwidth_ + 1);
  for (std::size_t k = 0; k < diagonals_.size(); ++k) {
    const long offset = static_cast<long>(k) - static_cast<long>(bandwidth_);
    diagonals_[k].assign(n_ - static_cast<std::size_t>(std::labs(offset)), 0.0);
  }
}

BandedOperator BandedOperator::tridiagonal(std::span<const double> diag,
                                           std::span<const double> off) {
  if (diag.empty() || off.size() + 1 != diag.size()) {
    throw std::invalid_argument("BandedOperator::tridiagonal: need n diagonal and n-1 off-diagonal entries");
  }
  BandedOperator t(diag.size(), diag.size() > 1 ? 1 : 0);
  for (std::size_t i = 0; i < diag.size(); ++i) t.set(i, i, diag[i]);
  for (std::size_t i = 0; i < off.size(); ++i) {
    t.set(i + 1, i, off[i]);
    t.set(i, i + 1, off[i]);
  }
  return t;
}

BandedOperator BandedOperator::diagonal(std::span<const double> diag) {
  BandedOperator d(diag.size(), 0);
  for (std::size_t i = 0; i < diag.size(); ++i) d.set(i, i, diag[i]);
  return d;
}

BandedOperator BandedOperator::from_dense(const Matrix& a, std::size_t bandwidth, double tol) {
  if (!a.square()) throw std::invalid_argument("BandedOperator: matrix must be square");
  const double scale = max_abs(a);
  BandedOperator b(a.rows(), bandwidth);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const std::size_t dist = i > j ? i - j : j - i;
      if (dist <= b.bandwidth_) {
        b.set(i, j, a(i, j));
      } else if (std::abs(a(i, j)) > tol * scale) {
        throw std::invalid_argument("BandedOperator: entry outside declared bandwidth");
      }
    }
  }
  return b;
}

double BandedOperator::operator()(std::size_t i, std::size_t j) const {
  const long offset = static_cast<long>(j) - static_cast<long>(i);
  if (static_cast<std::size_t>(std::labs(offset)) > bandwidth_) return 0.0;
  const auto& d = diagonals_[static_cast<std::size_t>(offset + static_cast<long>(bandwidth_))];
  return d[std::min(i, j)];
}

void BandedOperator::set(std::size_t i, std::size_t j, double value) {
  const long offset = static_cast<long>(j) - static_cast<long>(i);
  if (static_cast<std::size_t>(std::labs(offset)) > bandwidth_ || i >= n_ || j >= n_) {
    throw std::out_of_range("BandedOperator::set: entry outside band");
  }
  diagonals_[static_cast<std::size_t>(offset + static_cast<long>(bandwidth_))][std::min(i, j)] = value;
}

std::span<const double> BandedOperator::diagonal_at(long offset) const {
  if (static_cast<std::size_t>(std::labs(offset)) > bandwidth_) {
    throw std::out_of_range("BandedOperator::diagonal_at: offset outside band");
  }
  return diagonals_[static_cast<std::size_t>(offset + static_cast<long>(bandwidth_))];
}

Matrix BandedOperator::to_dense() const {
  Matrix m(n_, n_);
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t lo = i > bandwidth_ ? i - bandwidth_ : 0;
    const std::size_t hi = std::min(n_ - 1, i + bandwidth_);
    for (std::size_t j = lo; j <= hi; ++j) m(i, j) = (*this)(i, j);
  }
  return m;
}

BandedOperator BandedOperator::leading_block(std::size_t k) const {
  if (k == 0 || k > n_) throw std::out_of_range("BandedOperator::leading_block: invalid size");
  BandedOperator b(k, std::min(bandwidth_, k - 1));
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t lo = i > b.bandwidth_ ? i - b.bandwidth_ : 0;
    const std::size_t hi = std::min(k - 1, i + b.bandwidth_);
    for (std::size_t j = lo; j <= hi; ++j) b.set(i, j, (*this)(i, j));
  }
  return b;
}

bool BandedOperator::is_symmetric(double tol) const {
  const double scale = max_abs(to_dense());
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j <= std::min(n_ - 1, i + bandwidth_); ++j)
      if (std::abs((*this)(i, j) - (*this)(j, i)) > tol * scale) return false;
  return true;
}

SymmetricMatrix BandedOperator::to_symmetric(double tol) const {
  return SymmetricMatrix::from_dense(to_dense(), tol);
}

std::size_t BandedOperator::effective_bandwidth(double tol) const {
  const double scale = max_abs(to_dense());
  std::size_t bw = 0;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j)
      if (std::abs((*this)(i, j)) > tol * scale && std::abs((*this)(i, j)) > 0.0)
        bw = std::max(bw, i > j ? i - j : j - i);
  return bw;
}

}  // namespace heunband

namespace heunband {

std::vector<double> solve_linear(Matrix a, std::vector<double> b) {
  const std::size_t n = a.rows();
  if (!a.square() || b.size() != n) throw std::invalid_argument("solve_linear: shape mismatch");
  const double scale = max_abs(a);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    if (std::abs(a(piv, k)) <= 1e-14 * scale) throw std::invalid_argument("solve_linear: singular matrix");
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      std::swap(b[k], b[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      if (f == 0.0) continue;
      for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t k = n; k-- > 0;) {
    double s = b[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= a(k, j) * x[j];
    x[k] = s / a(k, k);
  }
  return x;
}

std::vector<double> least_squares(Matrix a, std::vector<double> b) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (m < n || b.size() != m) throw std::invalid_argument("least_squares: shape mismatch");
  for (std::size_t k = 0; k < n; ++k) {
    double norm = 0.0;
    for (std::size_t i = k; i < m; ++i) norm += a(i, k) * a(i, k);
    norm = std::sqrt(norm);
    if (norm == 0.0) throw std::invalid_argument("least_squares: rank deficient");
    const double alpha = a(k, k) > 0.0 ? -norm : norm;
    std::vector<double> v(m - k);
    for (std::size_t i = k; i < m; ++i) v[i - k] = a(i, k);
    v[0] -= alpha;
    double vnorm2 = 0.0;
    for (double t : v) vnorm2 += t * t;
    if (vnorm2 == 0.0) continue;
    for (std::size_t j = k; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t i = k; i < m; ++i) dot += v[i - k] * a(i, j);
      const double f = 2.0 * dot / vnorm2;
      for (std::size_t i = k; i < m; ++i) a(i, j) -= f * v[i - k];
    }
    double dot = 0.0;
    for (std::size_t i = k; i < m; ++i) dot += v[i - k] * b[i];
    const double f = 2.0 * dot / vnorm2;
    for (std::size_t i = k; i < m; ++i) b[i] -= f * v[i - k];
  }
  std::vector<double> x(n);
  for (std::size_t k = n; k-- > 0;) {
    double s = b[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= a(k, j) * x[j];
    if (a(k, k) == 0.0) throw std::invalid_argument("least_squares: rank deficient");
    x[k] = s / a(k, k);
  }
  return x;
}

}  // namespace heunband
