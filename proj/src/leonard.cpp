#include "heunband/leonard.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <stdexcept>

namespace heunband {

namespace {

double sorted_spectrum_error(const Recurrence& rec, std::vector<double> expected) {
  const Spectrum s = sym_eigen(rec.jacobi_matrix().to_symmetric());
  std::sort(expected.begin(), expected.end());
  double err = 0.0;
  for (std::size_t i = 0; i < expected.size(); ++i)
    err = std::max(err, std::abs(s.values[i] - expected[i]));
  return err;
}

void require_degree(int N, int min, const char* who) {
  if (N < min) throw std::invalid_argument(std::string(who) + ": N too small");
}

// Row s holds the unit eigenvector of the recurrence matrix belonging to
// nodes[s], i.e. ±√w_s φ_n(λ_s) for n = 0..N.
Matrix eigenvector_rows(const Recurrence& rec, std::span<const double> nodes) {
  const Spectrum sp = sym_eigen(rec.jacobi_matrix().to_symmetric());
  std::vector<std::size_t> order(nodes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return nodes[i] < nodes[j]; });
  const std::size_t n = rec.size();
  Matrix m(nodes.size(), n);
  for (std::size_t rank = 0; rank < order.size(); ++rank)
    for (std::size_t k = 0; k < n; ++k) m(order[rank], k) = sp.vectors(k, rank);
  return m;
}

double sign_of(double v) { return v < 0.0 ? -1.0 : 1.0; }

}  // namespace

BandedOperator Recurrence::jacobi_matrix() const {
  std::vector<double> off(a.begin() + 1, a.end());
  return BandedOperator::tridiagonal(b, off);
}

LeonardPair make_krawtchouk(int N, double p) {
  require_degree(N, 2, "make_krawtchouk");
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("make_krawtchouk: p must lie in (0, 1)");
  LeonardPair pair;
  pair.family = "krawtchouk";
  const auto n1 = static_cast<std::size_t>(N) + 1;
  pair.a.assign(n1, 0.0);
  pair.b.assign(n1, 0.0);
  pair.lambda.resize(n1);
  for (int n = 0; n <= N; ++n) {
    pair.b[n] = p * (N - n) + n * (1.0 - p);
    if (n > 0) pair.a[n] = std::sqrt(n * (1.0 - p) * p * (N - n + 1));
    pair.lambda[n] = N - n;
  }
  // Self-dual: the dual data coincide with the primal data.
  pair.mu = pair.lambda;
  pair.xi = pair.a;
  pair.eta = pair.b;
  return pair;
}

LeonardPair make_hahn(int N, double alpha, double beta) {
  require_degree(N, 2, "make_hahn");
  if (!(alpha > -1.0 && beta > -1.0)) {
    throw std::invalid_argument("make_hahn: alpha and beta must exceed -1");
  }
  const double s = alpha + beta;
  auto up = [&](int k) {
    return (k + s + 1) * (k + alpha + 1) * (N - k) / ((2 * k + s + 1) * (2 * k + s + 2));
  };
  auto down = [&](int k) {
    if (k == 0) return 0.0;
    return k * (k + s + N + 1) * (k + beta) / ((2 * k + s) * (2 * k + s + 1));
  };
  // Dual (difference-equation) coefficients in the variable s.
  auto dual_up = [&](int k) { return (k + beta + 1) * (k - N); };
  auto dual_down = [&](int k) { return k * (k - alpha - N - 1); };

  LeonardPair pair;
  pair.family = "hahn";
  const auto n1 = static_cast<std::size_t>(N) + 1;
  pair.a.assign(n1, 0.0);
  pair.b.assign(n1, 0.0);
  pair.xi.assign(n1, 0.0);
  pair.eta.assign(n1, 0.0);
  pair.lambda.resize(n1);
  pair.mu.resize(n1);
  for (int n = 0; n <= N; ++n) {
    pair.b[n] = up(n) + down(n);
    pair.eta[n] = dual_up(n) + dual_down(n);
    if (n > 0) {
      pair.a[n] = std::sqrt(up(n - 1) * down(n));
      pair.xi[n] = std::sqrt(dual_up(n - 1) * dual_down(n));
    }
    pair.lambda[n] = N - n;
    pair.mu[n] = -n * (n + s + 1);
  }
  return pair;
}

LeonardPair make_anti_krawtchouk(int N) {
  require_degree(N, 2, "make_anti_krawtchouk");
  if (N % 2 != 0) throw std::invalid_argument("make_anti_krawtchouk: N must be even");
  LeonardPair pair;
  pair.family = "anti_krawtchouk";
  const auto n1 = static_cast<std::size_t>(N) + 1;
  pair.lambda.resize(n1);
  pair.a.assign(n1, 0.0);
  pair.b.assign(n1, 0.0);
  for (int n = 0; n <= N; ++n) {
    pair.lambda[n] = (n % 2 == 0 ? 1.0 : -1.0) * (n + 0.5);
    if (n > 0) pair.a[n] = std::sqrt(((N + 1.0) * (N + 1.0) - double(n) * n) / 4.0);
  }
  pair.b[0] = (N % 2 == 0 ? 1.0 : -1.0) * (N + 1) / 2.0;
  pair.mu = pair.lambda;
  pair.xi = pair.a;
  pair.eta = pair.b;
  return pair;
}

LeonardInvariants check_leonard_invariants(const LeonardPair& pair) {
  LeonardInvariants inv;
  inv.couplings_nonzero = true;
  for (std::size_t n = 1; n < pair.size(); ++n)
    if (pair.a[n] == 0.0 || pair.xi[n] == 0.0) inv.couplings_nonzero = false;
  inv.spectra_distinct =
      min_spectral_gap(pair.lambda) > 0.0 && min_spectral_gap(pair.mu) > 0.0;
  inv.phi_spectrum_error = sorted_spectrum_error(pair.phi(), pair.lambda);
  inv.chi_spectrum_error = sorted_spectrum_error(pair.chi(), pair.mu);
  return inv;
}

std::vector<double> eval_orthonormal(const Recurrence& rec, double x, std::size_t up_to) {
  if (up_to >= rec.size()) throw std::out_of_range("eval_orthonormal: degree beyond recurrence");
  std::vector<double> p(up_to + 1);
  p[0] = 1.0;
  for (std::size_t n = 0; n < up_to; ++n) {
    const double prev = n > 0 ? rec.a[n] * p[n - 1] : 0.0;
    p[n + 1] = ((x - rec.b[n]) * p[n] - prev) / rec.a[n + 1];
  }
  return p;
}

PolynomialValues eval_orthonormal_with_derivative(const Recurrence& rec, double x,
                                                  std::size_t up_to) {
  if (up_to >= rec.size()) throw std::out_of_range("eval_orthonormal: degree beyond recurrence");
  PolynomialValues out;
  out.value.assign(up_to + 1, 0.0);
  out.slope.assign(up_to + 1, 0.0);
  out.value[0] = 1.0;
  for (std::size_t n = 0; n < up_to; ++n) {
    const double prev = n > 0 ? rec.a[n] * out.value[n - 1] : 0.0;
    const double prev_slope = n > 0 ? rec.a[n] * out.slope[n - 1] : 0.0;
    out.value[n + 1] = ((x - rec.b[n]) * out.value[n] - prev) / rec.a[n + 1];
    out.slope[n + 1] = (out.value[n] + (x - rec.b[n]) * out.slope[n] - prev_slope) / rec.a[n + 1];
  }
  return out;
}

double scaled_next(const Recurrence& rec, double x, std::size_t n, std::span<const double> phi) {
  const double prev = n > 0 ? rec.a[n] * phi[n - 1] : 0.0;
  return (x - rec.b[n]) * phi[n] - prev;
}

GridWeights grid_weights(const Recurrence& rec) {
  const Spectrum s = sym_eigen(rec.jacobi_matrix().to_symmetric());
  const double spread = spectral_spread(s.values);
  if (s.values.size() > 1 && min_spectral_gap(s.values) <= 1e-12 * std::max(spread, 1.0)) {
    throw std::invalid_argument("grid_weights: recurrence matrix has a repeated eigenvalue");
  }
  GridWeights g;
  g.nodes = s.values;
  g.weights.resize(s.values.size());
  for (std::size_t k = 0; k < s.values.size(); ++k) {
    const double v = s.vectors(0, k);
    g.weights[k] = v * v;
  }
  return g;
}

std::vector<double> christoffel_weights(const Recurrence& rec, std::span<const double> nodes) {
  std::vector<double> w(nodes.size());
  for (std::size_t s = 0; s < nodes.size(); ++s) {
    const auto phi = eval_orthonormal(rec, nodes[s], rec.size() - 1);
    double sum = 0.0;
    for (double v : phi) sum += v * v;
    w[s] = 1.0 / sum;
  }
  return w;
}

Matrix interbasis_matrix(const LeonardPair& pair) {
  Matrix u = eigenvector_rows(pair.phi(), pair.lambda);
  const std::size_t n = pair.size();
  const Matrix z = u * Matrix::diagonal(pair.mu) * u.transpose();
  // Row 0 follows φ₀ = 1 > 0; later rows follow the sign of xi.
  std::vector<double> gauge(n, 1.0);
  gauge[0] = sign_of(u(0, 0));
  for (std::size_t s = 1; s < n; ++s)
    gauge[s] = gauge[s - 1] * sign_of(z(s, s - 1)) * sign_of(pair.xi[s]);
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t k = 0; k < n; ++k) u(s, k) *= gauge[s];
  return u;
}

double duality_residual(const LeonardPair& pair) {
  const std::size_t n = pair.size();
  const Matrix p = eigenvector_rows(pair.phi(), pair.lambda);            // (s, n)
  const Matrix q = eigenvector_rows(pair.chi(), pair.mu).transpose();    // (s, n)

  // Propagate row/column signs through entries that are clearly nonzero.
  const double threshold = 1e-6 * max_abs(p);
  std::vector<double> row(n, 0.0), col(n, 0.0);
  for (std::size_t start = 0; start < n; ++start) {
    if (row[start] != 0.0) continue;
    row[start] = 1.0;
    std::queue<std::pair<bool, std::size_t>> pending;  // (is_row, index)
    pending.push({true, start});
    while (!pending.empty()) {
      const auto [is_row, i] = pending.front();
      pending.pop();
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t r = is_row ? i : j;
        const std::size_t c = is_row ? j : i;
        if (std::abs(p(r, c)) <= threshold || std::abs(q(r, c)) <= threshold) continue;
        const double rel = sign_of(p(r, c)) * sign_of(q(r, c));
        if (is_row && col[c] == 0.0) {
          col[c] = rel * row[r];
          pending.push({false, c});
        } else if (!is_row && row[r] == 0.0) {
          row[r] = rel * col[c];
          pending.push({true, r});
        }
      }
    }
  }
  double residual = 0.0;
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t k = 0; k < n; ++k) {
      const double cs = col[k] == 0.0 ? 1.0 : col[k];
      residual = std::max(residual, std::abs(p(s, k) - row[s] * cs * q(s, k)));
    }
  return residual;
}

double christoffel_darboux_residual(const Recurrence& rec, double x, double y, std::size_t n) {
  const auto px = eval_orthonormal(rec, x, n);
  const auto py = eval_orthonormal(rec, y, n);
  double sum = 0.0, scale = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    sum += px[k] * py[k];
    scale += std::abs(px[k] * py[k]);
  }
  const double nx = scaled_next(rec, x, n, px);
  const double ny = scaled_next(rec, y, n, py);
  const double closed = (nx * py[n] - ny * px[n]) / (x - y);
  return std::abs(sum - closed) / std::max(scale, 1e-300);
}

std::vector<double> consecutive_sums(std::span<const double> spectrum) {
  std::vector<double> sums;
  for (std::size_t n = 0; n + 1 < spectrum.size(); ++n) sums.push_back(spectrum[n] + spectrum[n + 1]);
  return sums;
}

Identifiability perline_degeneracy_check(std::span<const double> spectrum) {
  if (spectrum.size() < 3) {
    throw std::invalid_argument("perline_degeneracy_check: need at least 3 values");
  }
  const auto sums = consecutive_sums(spectrum);
  double scale = 0.0;
  for (double v : sums) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return Identifiability::degenerate;
  // 12 significant digits relative to the largest magnitude.
  const double quantum = std::pow(10.0, std::floor(std::log10(scale)) - 11.0);
  std::set<long long> seen;
  for (double v : sums) {
    if (!seen.insert(std::llround(v / quantum)).second) return Identifiability::degenerate;
  }
  return Identifiability::identifiable;
}

const char* to_string(Identifiability id) {
  return id == Identifiability::identifiable ? "identifiable" : "degenerate";
}

}  // namespace heunband
