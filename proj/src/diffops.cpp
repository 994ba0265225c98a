#include "heunband/diffops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace heunband {

namespace {

const Polynomial& factor_zero() {
  static const Polynomial p(std::vector<double>{0.0, 1.0});
  return p;
}
const Polynomial& factor_plus_one() {
  static const Polynomial p(std::vector<double>{-1.0, 1.0});
  return p;
}
const Polynomial& factor_minus_one() {
  static const Polynomial p(std::vector<double>{1.0, 1.0});
  return p;
}

Polynomial power(const Polynomial& p, int e) {
  Polynomial r = Polynomial::constant(1.0);
  for (int i = 0; i < e; ++i) r = r * p;
  return r;
}

// Synthetic division by (x − root); returns true and replaces p with the
// quotient when the remainder is exactly zero.
bool divide_exact(Polynomial& p, double root) {
  const auto& c = p.coeffs();
  if (c.empty()) return false;
  const int n = static_cast<int>(c.size());
  std::vector<double> q(n > 1 ? n - 1 : 0);
  double carry = 0.0;
  for (int k = n - 1; k >= 1; --k) {
    carry = c[k] + carry * root;
    q[k - 1] = carry;
  }
  const double remainder = c[0] + carry * root;
  if (remainder != 0.0) return false;
  p = Polynomial(std::move(q));
  return true;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

Polynomial::Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) { trim(); }

Polynomial Polynomial::constant(double c) { return Polynomial(std::vector<double>{c}); }

Polynomial Polynomial::monomial(double c, int degree) {
  std::vector<double> v(static_cast<std::size_t>(degree) + 1, 0.0);
  v.back() = c;
  return Polynomial(std::move(v));
}

void Polynomial::trim() {
  while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
}

double Polynomial::coeff(int k) const {
  return k >= 0 && k < static_cast<int>(c_.size()) ? c_[k] : 0.0;
}

double Polynomial::max_abs_coeff() const {
  double m = 0.0;
  for (double v : c_) m = std::max(m, std::abs(v));
  return m;
}

double Polynomial::operator()(double x) const {
  double r = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) r = r * x + *it;
  return r;
}

Polynomial Polynomial::derivative() const {
  if (c_.size() <= 1) return {};
  std::vector<double> d(c_.size() - 1);
  for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = static_cast<double>(k) * c_[k];
  return Polynomial(std::move(d));
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), 0.0);
  for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] += o.c_[k];
  trim();
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
  if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), 0.0);
  for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] -= o.c_[k];
  trim();
  return *this;
}

Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.is_zero() || b.is_zero()) return {};
  std::vector<double> r(a.coeffs().size() + b.coeffs().size() - 1, 0.0);
  for (std::size_t i = 0; i < a.coeffs().size(); ++i)
    for (std::size_t j = 0; j < b.coeffs().size(); ++j) r[i + j] += a.coeffs()[i] * b.coeffs()[j];
  return Polynomial(std::move(r));
}

Polynomial operator*(double s, const Polynomial& a) {
  std::vector<double> r = a.coeffs();
  for (auto& v : r) v *= s;
  return Polynomial(std::move(r));
}

RationalCoefficient::RationalCoefficient(Polynomial numerator, PoleOrders poles)
    : num_(std::move(numerator)), poles_(poles) {
  if (poles_.at_zero < 0 || poles_.at_plus_one < 0 || poles_.at_minus_one < 0) {
    throw std::invalid_argument("RationalCoefficient: negative pole order");
  }
  cancel_common_factors();
}

RationalCoefficient::RationalCoefficient(double c) : num_(Polynomial::constant(c)) {}

RationalCoefficient RationalCoefficient::from_polynomials(const Polynomial& numerator,
                                                          const Polynomial& denominator) {
  if (denominator.is_zero()) {
    throw std::invalid_argument("RationalCoefficient: denominator is identically zero");
  }
  Polynomial rest = denominator;
  PoleOrders poles;
  while (rest.degree() > 0 && divide_exact(rest, 0.0)) ++poles.at_zero;
  while (rest.degree() > 0 && divide_exact(rest, 1.0)) ++poles.at_plus_one;
  while (rest.degree() > 0 && divide_exact(rest, -1.0)) ++poles.at_minus_one;
  if (rest.degree() != 0) {
    throw std::invalid_argument(
        "RationalCoefficient: denominator must be a product of x, (x-1), (x+1) powers");
  }
  return RationalCoefficient((1.0 / rest.coeff(0)) * numerator, poles);
}

void RationalCoefficient::cancel_common_factors() {
  if (num_.is_zero()) {
    poles_ = {};
    return;
  }
  while (poles_.at_zero > 0 && divide_exact(num_, 0.0)) --poles_.at_zero;
  while (poles_.at_plus_one > 0 && divide_exact(num_, 1.0)) --poles_.at_plus_one;
  while (poles_.at_minus_one > 0 && divide_exact(num_, -1.0)) --poles_.at_minus_one;
}

Polynomial RationalCoefficient::denominator() const {
  return power(factor_zero(), poles_.at_zero) * power(factor_plus_one(), poles_.at_plus_one) *
         power(factor_minus_one(), poles_.at_minus_one);
}

bool RationalCoefficient::has_pole_at(double x) const {
  return (poles_.at_zero > 0 && x == 0.0) || (poles_.at_plus_one > 0 && x == 1.0) ||
         (poles_.at_minus_one > 0 && x == -1.0);
}

double RationalCoefficient::operator()(double x) const {
  if (has_pole_at(x)) throw std::domain_error("RationalCoefficient: evaluation at a pole");
  return num_(x) / denominator()(x);
}

RationalCoefficient RationalCoefficient::derivative() const {
  // d/dx [n / Π f^e] = [n' Π f − n Σ e_f Π_{g≠f} g] / (Π f^e · Π f), products
  // over the factors actually present.
  struct Active {
    const Polynomial* factor;
    int order;
  };
  std::vector<Active> active;
  if (poles_.at_zero > 0) active.push_back({&factor_zero(), poles_.at_zero});
  if (poles_.at_plus_one > 0) active.push_back({&factor_plus_one(), poles_.at_plus_one});
  if (poles_.at_minus_one > 0) active.push_back({&factor_minus_one(), poles_.at_minus_one});

  Polynomial all = Polynomial::constant(1.0);
  for (const auto& a : active) all = all * *a.factor;

  Polynomial numerator = num_.derivative() * all;
  for (std::size_t i = 0; i < active.size(); ++i) {
    Polynomial others = Polynomial::constant(static_cast<double>(active[i].order));
    for (std::size_t j = 0; j < active.size(); ++j)
      if (j != i) others = others * *active[j].factor;
    numerator -= num_ * others;
  }
  PoleOrders poles = poles_;
  if (poles.at_zero > 0) ++poles.at_zero;
  if (poles.at_plus_one > 0) ++poles.at_plus_one;
  if (poles.at_minus_one > 0) ++poles.at_minus_one;
  return RationalCoefficient(std::move(numerator), poles);
}

namespace {

PoleOrders max_poles(const PoleOrders& a, const PoleOrders& b) {
  return {std::max(a.at_zero, b.at_zero), std::max(a.at_plus_one, b.at_plus_one),
          std::max(a.at_minus_one, b.at_minus_one)};
}

// Numerator of r rewritten over the larger denominator `target`.
Polynomial lift(const RationalCoefficient& r, const PoleOrders& target) {
  return r.numerator() * power(factor_zero(), target.at_zero - r.poles().at_zero) *
         power(factor_plus_one(), target.at_plus_one - r.poles().at_plus_one) *
         power(factor_minus_one(), target.at_minus_one - r.poles().at_minus_one);
}

}  // namespace

RationalCoefficient operator+(const RationalCoefficient& a, const RationalCoefficient& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  const PoleOrders common = max_poles(a.poles(), b.poles());
  return RationalCoefficient(lift(a, common) + lift(b, common), common);
}

RationalCoefficient operator-(const RationalCoefficient& a, const RationalCoefficient& b) {
  const PoleOrders common = max_poles(a.poles(), b.poles());
  return RationalCoefficient(lift(a, common) - lift(b, common), common);
}

RationalCoefficient operator*(const RationalCoefficient& a, const RationalCoefficient& b) {
  const PoleOrders& p = a.poles();
  const PoleOrders& q = b.poles();
  return RationalCoefficient(
      a.numerator() * b.numerator(),
      {p.at_zero + q.at_zero, p.at_plus_one + q.at_plus_one, p.at_minus_one + q.at_minus_one});
}

DiffOperator DiffOperator::identity() { return term(0, 1.0); }

DiffOperator DiffOperator::multiplication(const RationalCoefficient& f) { return term(0, f); }

DiffOperator DiffOperator::term(int order, const RationalCoefficient& c) {
  DiffOperator d;
  d.add_term(order, c);
  return d;
}

DiffOperator DiffOperator::derivative(int order) { return term(order, 1.0); }

RationalCoefficient DiffOperator::coefficient(int order) const {
  auto it = terms_.find(order);
  return it == terms_.end() ? RationalCoefficient{} : it->second;
}

int DiffOperator::order() const { return terms_.empty() ? -1 : terms_.rbegin()->first; }

void DiffOperator::add_term(int order, const RationalCoefficient& c) {
  if (order < 0) throw std::invalid_argument("DiffOperator: negative derivative order");
  auto it = terms_.find(order);
  RationalCoefficient sum = it == terms_.end() ? c : it->second + c;
  if (sum.is_zero()) {
    if (it != terms_.end()) terms_.erase(it);
  } else {
    terms_[order] = std::move(sum);
  }
}

RationalCoefficient DiffOperator::apply(const RationalCoefficient& f) const {
  RationalCoefficient result;
  RationalCoefficient deriv = f;
  int k = 0;
  for (const auto& [order, c] : terms_) {
    while (k < order) {
      deriv = deriv.derivative();
      ++k;
    }
    result = result + c * deriv;
  }
  return result;
}

DiffOperator op_add(const DiffOperator& p, const DiffOperator& q) {
  DiffOperator r = p;
  for (const auto& [k, c] : q.terms()) r.add_term(k, c);
  return r;
}

DiffOperator op_scale(double c, const DiffOperator& p) {
  DiffOperator r;
  if (c == 0.0) return r;
  for (const auto& [k, coeff] : p.terms()) r.add_term(k, RationalCoefficient(c) * coeff);
  return r;
}

DiffOperator op_compose(const DiffOperator& p, const DiffOperator& q) {
  // p_i ∂^i ∘ q_j ∂^j = Σ_m C(i,m) p_i q_j^{(m)} ∂^{i−m+j}
  DiffOperator r;
  for (const auto& [j, qj] : q.terms()) {
    RationalCoefficient deriv = qj;
    int m_done = 0;
    std::vector<RationalCoefficient> derivs{qj};
    for (const auto& [i, pi] : p.terms()) {
      while (m_done < i) {
        deriv = deriv.derivative();
        derivs.push_back(deriv);
        ++m_done;
      }
      for (int m = 0; m <= i; ++m) {
        if (derivs[m].is_zero()) continue;
        r.add_term(i - m + j, RationalCoefficient(binomial(i, m)) * pi * derivs[m]);
      }
    }
  }
  return r;
}

DiffOperator anticommutator(const DiffOperator& p, const DiffOperator& q) {
  return op_add(op_compose(p, q), op_compose(q, p));
}

DiffOperator operator+(const DiffOperator& p, const DiffOperator& q) { return op_add(p, q); }
DiffOperator operator-(const DiffOperator& p, const DiffOperator& q) {
  return op_add(p, op_scale(-1.0, q));
}
DiffOperator operator*(double c, const DiffOperator& p) { return op_scale(c, p); }
DiffOperator operator*(const DiffOperator& p, const DiffOperator& q) { return op_compose(p, q); }

double op_difference(const DiffOperator& p, const DiffOperator& q) {
  std::vector<int> orders;
  for (const auto& [k, c] : p.terms()) orders.push_back(k);
  for (const auto& [k, c] : q.terms()) orders.push_back(k);
  std::sort(orders.begin(), orders.end());
  orders.erase(std::unique(orders.begin(), orders.end()), orders.end());

  double diff = 0.0;
  double scale = 1.0;
  for (int k : orders) {
    const RationalCoefficient a = p.coefficient(k);
    const RationalCoefficient b = q.coefficient(k);
    const Polynomial left = a.numerator() * b.denominator();
    const Polynomial right = b.numerator() * a.denominator();
    scale = std::max({scale, left.max_abs_coeff(), right.max_abs_coeff()});
    diff = std::max(diff, (left - right).max_abs_coeff());
  }
  return diff / scale;
}

bool op_equal(const DiffOperator& p, const DiffOperator& q, double tol) {
  return op_difference(p, q) <= tol;
}

std::vector<BoundaryCheck> boundary_commutation_check(const DiffOperator& m,
                                                      std::span<const double> endpoints,
                                                      double tol) {
  if (m.order() > 2) {
    throw std::invalid_argument("boundary_commutation_check: operator order exceeds 2");
  }
  const RationalCoefficient lead = m.coefficient(2);
  const RationalCoefficient lead_slope = lead.derivative();
  const RationalCoefficient first = m.coefficient(1);

  std::vector<BoundaryCheck> out;
  for (double e : endpoints) {
    BoundaryCheck c;
    c.endpoint = e;
    if (lead.has_pole_at(e) || first.has_pole_at(e) || lead_slope.has_pole_at(e)) {
      c.pole = true;
      out.push_back(c);
      continue;
    }
    const double a = lead(e);
    const double da = lead_slope(e);
    const double b = first(e);
    const double scale = std::max({1.0, std::abs(da), std::abs(b)});
    c.leading_value = a;
    c.slope_mismatch = b - da;
    c.passed = std::abs(a) <= tol * scale && std::abs(b - da) <= tol * scale;
    out.push_back(c);
  }
  return out;
}

}  // namespace heunband
