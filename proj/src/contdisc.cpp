#include "heunband/contdisc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace heunband {

namespace {

constexpr int kOrder = 32;

struct GaussRule {
  std::array<double, kOrder> nodes{};
  std::array<double, kOrder> weights{};
};

// Legendre nodes on [−1, 1] by Newton iteration from the Chebyshev guess.
const GaussRule& gauss_legendre() {
  static const GaussRule rule = [] {
    GaussRule r;
    for (int i = 0; i < kOrder; ++i) {
      double x = std::cos(std::numbers::pi * (i + 0.75) / (kOrder + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= kOrder; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = kOrder * (x * p1 - p0) / (x * x - 1.0);
        const double step = p1 / dp;
        x -= step;
        if (std::abs(step) < 1e-16) break;
      }
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= kOrder; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = kOrder * (x * p1 - p0) / (x * x - 1.0);
      r.nodes[i] = x;
      r.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
  }();
  return rule;
}

bool is_integer(double v) { return v == std::floor(v); }

using Panels = std::vector<std::pair<double, double>>;

// Panels accumulating geometrically toward `end`.
void graded(double from, double end, Panels& out) {
  constexpr int kLevels = 48;
  std::vector<double> cuts;
  for (int k = 0; k <= kLevels; ++k) cuts.push_back(end + (from - end) * std::ldexp(1.0, -k));
  cuts.push_back(end);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    out.emplace_back(std::min(cuts[i], cuts[i + 1]), std::max(cuts[i], cuts[i + 1]));
}

Panels initial_panels(double left, double right, bool singular_left, bool singular_right) {
  Panels p;
  if (!singular_left && !singular_right) {
    constexpr int kStart = 4;
    for (int i = 0; i < kStart; ++i)
      p.emplace_back(left + (right - left) * i / kStart, left + (right - left) * (i + 1) / kStart);
    return p;
  }
  const double mid = 0.5 * (left + right);
  if (singular_left) {
    graded(mid, left, p);
  } else {
    p.emplace_back(left, mid);
  }
  if (singular_right) {
    graded(mid, right, p);
  } else {
    p.emplace_back(mid, right);
  }
  return p;
}

// Packed lower triangle of ∫ ρ p_i p_j over the panels.
std::vector<double> integrate(const ClassicalFamily& f, int N, const Panels& panels) {
  const GaussRule& g = gauss_legendre();
  const auto n1 = static_cast<std::size_t>(N) + 1;
  std::vector<double> acc(n1 * (n1 + 1) / 2, 0.0);
  for (const auto& [lo, hi] : panels) {
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    if (half == 0.0) continue;
    for (int q = 0; q < kOrder; ++q) {
      const double x = mid + half * g.nodes[q];
      const double w = half * g.weights[q] * f.weight(x);
      if (w == 0.0) continue;
      const auto p = f.orthonormal(x, N);
      std::size_t idx = 0;
      for (std::size_t i = 0; i < n1; ++i)
        for (std::size_t j = 0; j <= i; ++j) acc[idx++] += w * p[i] * p[j];
    }
  }
  return acc;
}

Panels halve(const Panels& p) {
  Panels out;
  out.reserve(2 * p.size());
  for (const auto& [lo, hi] : p) {
    const double mid = 0.5 * (lo + hi);
    out.emplace_back(lo, mid);
    out.emplace_back(mid, hi);
  }
  return out;
}

struct Integrated {
  std::vector<double> packed;
  double error = 0.0;
  int panels = 0;
  bool converged = false;
};

Integrated integrate_adaptive(const ClassicalFamily& f, int N, double left, double right,
                              bool singular_left, bool singular_right, const QuadratureOptions& opts) {
  Panels panels = initial_panels(left, right, singular_left, singular_right);
  Integrated r;
  r.packed = integrate(f, N, panels);
  for (int level = 0; level < opts.max_levels; ++level) {
    panels = halve(panels);
    auto next = integrate(f, N, panels);
    double diff = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i) diff = std::max(diff, std::abs(next[i] - r.packed[i]));
    r.packed = std::move(next);
    r.error = diff;
    r.panels = static_cast<int>(panels.size());
    if (diff < opts.tolerance) {
      r.converged = true;
      break;
    }
  }
  return r;
}

double christoffel_sum(const ClassicalFamily& f, double x, int N) {
  double s = 0.0;
  for (double v : f.orthonormal(x, N)) s += v * v;
  return s;
}

// Left end for Hermite where the remaining tail is below 1e-17.
double hermite_cutoff(const ClassicalFamily& f, int N, double W) {
  double l = std::min(-std::sqrt(2.0 * N + 1.0) - 1.0, W - 1.0);
  while (f.weight(l) * christoffel_sum(f, l, N) / (2.0 * std::abs(l)) > 1e-17) l -= 0.5;
  return l;
}

double laguerre_cutoff(const ClassicalFamily& f, int N) {
  double r = 4.0 * N + 10.0;
  while (f.weight(r) * christoffel_sum(f, r, N) > 1e-17) r += 1.0;
  return r;
}

bool singular_left(const ClassicalFamily& f) {
  switch (f.kind()) {
    case FamilyKind::hermite: return false;
    case FamilyKind::laguerre: return !is_integer(-f.alpha());
    case FamilyKind::jacobi: return !is_integer(f.beta());
  }
  return false;
}

SymmetricMatrix unpack(const std::vector<double>& packed, int N) {
  SymmetricMatrix k(static_cast<std::size_t>(N) + 1);
  std::size_t idx = 0;
  for (int i = 0; i <= N; ++i)
    for (int j = 0; j <= i; ++j) k(i, j) = packed[idx++];
  return k;
}

RationalCoefficient poly(std::vector<double> c) { return RationalCoefficient(Polynomial(std::move(c))); }

}  // namespace

std::string ClassicalFamily::name() const {
  switch (kind_) {
    case FamilyKind::hermite: return "hermite";
    case FamilyKind::laguerre: return "laguerre(" + std::to_string(alpha_) + ")";
    case FamilyKind::jacobi:
      return "jacobi(" + std::to_string(alpha_) + "," + std::to_string(beta_) + ")";
  }
  return "unknown";
}

double ClassicalFamily::support_left() const {
  switch (kind_) {
    case FamilyKind::hermite: return -std::numeric_limits<double>::infinity();
    case FamilyKind::laguerre: return 0.0;
    case FamilyKind::jacobi: return -1.0;
  }
  return 0.0;
}

double ClassicalFamily::support_right() const {
  return kind_ == FamilyKind::jacobi ? 1.0 : std::numeric_limits<double>::infinity();
}

double ClassicalFamily::weight(double x) const {
  switch (kind_) {
    case FamilyKind::hermite: return std::exp(-x * x);
    case FamilyKind::laguerre: return x < 0.0 ? 0.0 : std::pow(x, -alpha_) * std::exp(-x);
    case FamilyKind::jacobi:
      if (x < -1.0 || x > 1.0) return 0.0;
      return std::pow(1.0 - x, alpha_) * std::pow(1.0 + x, beta_);
  }
  return 0.0;
}

double ClassicalFamily::total_mass() const {
  switch (kind_) {
    case FamilyKind::hermite: return std::sqrt(std::numbers::pi);
    case FamilyKind::laguerre: return std::tgamma(1.0 - alpha_);
    case FamilyKind::jacobi: {
      const double s = alpha_ + beta_;
      return std::pow(2.0, s + 1.0) * std::tgamma(alpha_ + 1.0) * std::tgamma(beta_ + 1.0) /
             std::tgamma(s + 2.0);
    }
  }
  return 1.0;
}

Recurrence ClassicalFamily::recurrence(std::size_t n_terms) const {
  Recurrence r;
  r.a.assign(n_terms, 0.0);
  r.b.assign(n_terms, 0.0);
  const double s = alpha_ + beta_;
  const double ap = -alpha_;  // Laguerre exponent of x in the weight
  for (std::size_t k = 0; k < n_terms; ++k) {
    const double n = static_cast<double>(k);
    switch (kind_) {
      case FamilyKind::hermite:
        r.b[k] = 0.0;
        if (k > 0) r.a[k] = std::sqrt(n / 2.0);
        break;
      case FamilyKind::laguerre:
        r.b[k] = 2.0 * n + ap + 1.0;
        if (k > 0) r.a[k] = std::sqrt(n * (n + ap));
        break;
      case FamilyKind::jacobi:
        r.b[k] = k == 0 ? (beta_ - alpha_) / (s + 2.0)
                        : (beta_ * beta_ - alpha_ * alpha_) / ((2 * n + s) * (2 * n + s + 2));
        if (k > 0) {
          r.a[k] = std::sqrt(4.0 * n * (n + alpha_) * (n + beta_) * (n + s) /
                             ((2 * n + s) * (2 * n + s) * (2 * n + s + 1) * (2 * n + s - 1)));
        }
        break;
    }
  }
  return r;
}

std::vector<double> ClassicalFamily::orthonormal(double x, int N) const {
  const Recurrence r = recurrence(static_cast<std::size_t>(N) + 1);
  auto p = eval_orthonormal(r, x, static_cast<std::size_t>(N));
  const double scale = 1.0 / std::sqrt(total_mass());
  for (auto& v : p) v *= scale;
  return p;
}

double ClassicalFamily::eigenvalue(int n) const {
  switch (kind_) {
    case FamilyKind::hermite: return -2.0 * n;
    case FamilyKind::laguerre: return -static_cast<double>(n);
    case FamilyKind::jacobi: return -n * (n + alpha_ + beta_ + 1.0);
  }
  return 0.0;
}

double ClassicalFamily::sigma(int N) const {
  switch (kind_) {
    case FamilyKind::hermite: return 2.0 * N + 1.0;
    case FamilyKind::laguerre: return N + 0.5;
    case FamilyKind::jacobi: return (N + 1.0) * (N + 1.0) + (N + 0.5) * (alpha_ + beta_);
  }
  return 0.0;
}

double ClassicalFamily::a_constant(int N) const {
  switch (kind_) {
    case FamilyKind::hermite: return 2.0 * N;
    case FamilyKind::laguerre: return N;
    case FamilyKind::jacobi: return N * (N + alpha_ + beta_ + 2.0);
  }
  return 0.0;
}

Polynomial ClassicalFamily::leading_factor() const {
  switch (kind_) {
    case FamilyKind::hermite: return Polynomial({1.0});
    case FamilyKind::laguerre: return Polynomial({0.0, 1.0});
    case FamilyKind::jacobi: return Polynomial({1.0, 0.0, -1.0});
  }
  return {};
}

DiffOperator ClassicalFamily::polynomial_operator() const {
  DiffOperator d = DiffOperator::term(2, RationalCoefficient(leading_factor()));
  switch (kind_) {
    case FamilyKind::hermite: d.add_term(1, poly({0.0, -2.0})); break;
    case FamilyKind::laguerre: d.add_term(1, poly({1.0 - alpha_, -1.0})); break;
    case FamilyKind::jacobi: d.add_term(1, poly({beta_ - alpha_, -(alpha_ + beta_ + 2.0)})); break;
  }
  return d;
}

double ClassicalFamily::identity_shift() const {
  switch (kind_) {
    case FamilyKind::hermite: return 0.0;
    case FamilyKind::laguerre: return (alpha_ + 1.0) / 2.0;
    case FamilyKind::jacobi: return (alpha_ - beta_) / 2.0;
  }
  return 0.0;
}

ClassicalFamily make_family(FamilyKind kind, double alpha, double beta) {
  if (!std::isfinite(alpha) || !std::isfinite(beta)) {
    throw std::invalid_argument("make_family: parameters must be finite");
  }
  ClassicalFamily f;
  f.kind_ = kind;
  switch (kind) {
    case FamilyKind::hermite:
      break;
    case FamilyKind::laguerre:
      if (alpha > 0.0) throw std::invalid_argument("make_family: Laguerre requires alpha <= 0");
      f.alpha_ = alpha;
      break;
    case FamilyKind::jacobi:
      if (alpha < 0.0 || beta < 0.0) {
        throw std::invalid_argument("make_family: Jacobi requires alpha, beta >= 0");
      }
      f.alpha_ = alpha;
      f.beta_ = beta;
      break;
  }
  return f;
}

FamilyKind parse_family_kind(const std::string& name) {
  if (name == "hermite") return FamilyKind::hermite;
  if (name == "laguerre") return FamilyKind::laguerre;
  if (name == "jacobi") return FamilyKind::jacobi;
  throw std::invalid_argument("unknown classical family '" + name + "' (expected hermite, laguerre, jacobi)");
}

const char* to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::hermite: return "hermite";
    case FamilyKind::laguerre: return "laguerre";
    case FamilyKind::jacobi: return "jacobi";
  }
  return "unknown";
}

KernelMatrixQ kernel_matrix_quadrature(const ClassicalFamily& family, int N, double W,
                                       const QuadratureOptions& opts) {
  if (N < 0) throw std::invalid_argument("kernel_matrix_quadrature: N must be non-negative");
  if (!std::isfinite(W) || W <= family.support_left() || W > family.support_right()) {
    throw std::invalid_argument("kernel_matrix_quadrature: W outside the support");
  }
  const double left = family.kind() == FamilyKind::hermite ? hermite_cutoff(family, N, W)
                                                           : family.support_left();
  const bool right_singular = family.kind() == FamilyKind::jacobi && W == 1.0 &&
                              !is_integer(family.alpha());
  const Integrated r =
      integrate_adaptive(family, N, left, W, singular_left(family), right_singular, opts);
  KernelMatrixQ k;
  k.k = unpack(r.packed, N);
  k.error_estimate = r.error;
  k.lower_limit = left;
  k.panels = r.panels;
  k.converged = r.converged;
  return k;
}

double orthonormality_residual(const ClassicalFamily& family, int N) {
  double left = family.support_left();
  double right = family.support_right();
  bool right_singular = false;
  switch (family.kind()) {
    case FamilyKind::hermite:
      left = hermite_cutoff(family, N, 0.0);
      right = -left;
      break;
    case FamilyKind::laguerre:
      right = laguerre_cutoff(family, N);
      break;
    case FamilyKind::jacobi:
      right_singular = !is_integer(family.alpha());
      break;
  }
  const Integrated r =
      integrate_adaptive(family, N, left, right, singular_left(family), right_singular, {});
  const SymmetricMatrix k = unpack(r.packed, N);
  double d = 0.0;
  for (int i = 0; i <= N; ++i)
    for (int j = 0; j <= i; ++j) d = std::max(d, std::abs(k(i, j) - (i == j ? 1.0 : 0.0)));
  return d;
}

SymmetricMatrix commuting_matrix(const ClassicalFamily& family, int N, double W, double sigma) {
  if (N < 1) throw std::invalid_argument("commuting_matrix: N must be at least 1");
  const Matrix l = family.recurrence(static_cast<std::size_t>(N) + 1).jacobi_matrix().to_dense();
  std::vector<double> eig(static_cast<std::size_t>(N) + 1);
  for (int n = 0; n <= N; ++n) eig[n] = family.eigenvalue(n);
  const Matrix lam = Matrix::diagonal(eig);
  const Matrix t = 0.5 * anticommutator(l, lam) - W * lam + sigma * l;
  return SymmetricMatrix::from_dense(t, 1e-14);
}

SymmetricMatrix commuting_matrix(const ClassicalFamily& family, int N, double W) {
  return commuting_matrix(family, N, W, family.sigma(N));
}

SigmaFit fit_sigma(const ClassicalFamily& family, int N, double W, const SymmetricMatrix& k) {
  const Matrix kd = k.to_dense();
  const Matrix l = family.recurrence(static_cast<std::size_t>(N) + 1).jacobi_matrix().to_dense();
  const Matrix t0 = commuting_matrix(family, N, W, 0.0).to_dense();
  const Matrix c0 = commutator(t0, kd);
  const Matrix c1 = commutator(l, kd);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < c0.data().size(); ++i) {
    num += c0.data()[i] * c1.data()[i];
    den += c1.data()[i] * c1.data()[i];
  }
  SigmaFit fit;
  fit.table = family.sigma(N);
  fit.degenerate = std::sqrt(den) <= 1e-12 * frobenius_norm(l) * frobenius_norm(kd);
  fit.sigma = fit.degenerate ? 0.0 : -num / den;
  return fit;
}

DiffOperator prolate_operator(double T, double W) {
  const DiffOperator d = DiffOperator::derivative();
  const DiffOperator inner = DiffOperator::multiplication(poly({T * T, 0.0, -1.0}));
  return d * inner * d - DiffOperator::multiplication(poly({0.0, 0.0, W * W}));
}

double prolate_identity_residual(double T, double W, const std::array<double, 4>& s) {
  const DiffOperator l = -1.0 * DiffOperator::derivative(2);
  const DiffOperator omega = DiffOperator::multiplication(poly({0.0, 0.0, 1.0}));
  const DiffOperator lhs = s[0] * anticommutator(l, omega) + s[1] * l + s[2] * omega +
                           s[3] * DiffOperator::identity();
  return op_difference(lhs, prolate_operator(T, W));
}

bool verify_prolate_identity(double T, double W, double tol) {
  return prolate_identity_residual(T, W, {0.5, -T * T, -W * W, 1.0}) <= tol;
}

DiffOperator bessel_operator(double G, double T, double nu) {
  const DiffOperator d = DiffOperator::derivative();
  const DiffOperator inner = DiffOperator::multiplication(poly({G * G, 0.0, -1.0}));
  const RationalCoefficient singular(Polynomial({G * G * (nu * nu - 0.25)}), PoleOrders{2, 0, 0});
  return -1.0 * (d * inner * d) + DiffOperator::multiplication(poly({0.0, 0.0, T * T})) +
         DiffOperator::multiplication(singular);
}

double bessel_identity_residual(double G, double T, double nu, const std::array<double, 4>& s) {
  const RationalCoefficient potential(Polynomial({nu * nu - 0.25}), PoleOrders{2, 0, 0});
  const DiffOperator l =
      -1.0 * DiffOperator::derivative(2) + DiffOperator::multiplication(potential);
  const DiffOperator omega = DiffOperator::multiplication(poly({0.0, 0.0, 1.0}));
  const DiffOperator lhs = s[0] * anticommutator(l, omega) + s[1] * l + s[2] * omega +
                           s[3] * DiffOperator::identity();
  return op_difference(lhs, bessel_operator(G, T, nu));
}

bool verify_bessel_identity(double G, double T, double nu, double tol) {
  return bessel_identity_residual(G, T, nu, {-0.5, G * G, T * T, nu * nu - 1.25}) <= tol;
}

TildeDReport verify_tilde_d(const ClassicalFamily& family, int N, double W) {
  TildeDReport r;
  const DiffOperator d = family.polynomial_operator();
  const DiffOperator x = DiffOperator::multiplication(poly({0.0, 1.0}));
  r.a_n = family.a_constant(N);
  r.tilde_d = 0.5 * anticommutator(d, x) - W * d + family.sigma(N) * x +
              family.identity_shift() * DiffOperator::identity();

  const std::array<double, 1> endpoint{W};
  r.boundary_at_w = boundary_commutation_check(r.tilde_d, endpoint).front();
  r.leading_at_w = r.tilde_d.coefficient(2)(W);

  // (1/ρ) d/dx((x − W) q ρ d/dx) + A_N x = (x − W) D + q ∂ + A_N x
  const DiffOperator divergence = DiffOperator::multiplication(poly({-W, 1.0})) * d +
                                  DiffOperator::term(1, RationalCoefficient(family.leading_factor())) +
                                  r.a_n * x;
  const DiffOperator diff = r.tilde_d - divergence;
  const Polynomial zeroth = diff.coefficient(0).numerator();
  r.constant_offset = zeroth.coeff(0);
  DiffOperator varying = diff;
  varying.add_term(0, RationalCoefficient(-r.constant_offset));
  r.divergence_mismatch = op_difference(varying, DiffOperator{});

  r.passed = r.boundary_at_w.passed && r.divergence_mismatch <= 1e-12;
  if (family.kind() == FamilyKind::hermite) r.passed = r.passed && std::abs(r.constant_offset) <= 1e-12;
  return r;
}

ContDiscReport analyze_contdisc(const ClassicalFamily& family, int N, double W) {
  ContDiscReport r;
  r.family = family.name();
  r.N = N;
  r.W = W;
  r.kernel = kernel_matrix_quadrature(family, N, W);
  r.sigma_table = family.sigma(N);
  r.fit = fit_sigma(family, N, W, r.kernel.k);

  const SymmetricMatrix t = commuting_matrix(family, N, W);
  r.comm_tk = commutator_residual(t, r.kernel.k);
  const Spectrum ts = sym_eigen(t);
  r.t_spectrum = ts.values;
  r.t_gap = min_spectral_gap(ts.values);

  const Matrix kd = r.kernel.k.to_dense();
  const Matrix rotated = ts.vectors.transpose() * kd * ts.vectors;
  double off = 0.0;
  for (std::size_t i = 0; i < rotated.rows(); ++i)
    for (std::size_t j = 0; j < rotated.cols(); ++j)
      if (i != j) off = std::max(off, std::abs(rotated(i, j)));
  r.offdiag_in_t_basis = off / std::max(max_abs(kd), 1e-300);

  r.concentration = sym_eigen(r.kernel.k).values;
  r.kernel_spectrum_min = r.concentration.front();
  r.kernel_spectrum_max = r.concentration.back();
  r.tilde_d = verify_tilde_d(family, N, W);
  return r;
}

}  // namespace heunband
