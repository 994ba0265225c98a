#pragma once

// Linear differential operators with rational coefficients whose poles lie
// at 0 and ±1, kept in normal-ordered form (coefficient to the left of ∂^k).

#include <map>
#include <optional>
#include <span>
#include <vector>

namespace heunband {

/// Real polynomial, coefficients in ascending powers. Trailing exact zeros
/// are trimmed so the zero polynomial has no coefficients.
class Polynomial {
 public:
  Polynomial() = default;
  Polynomial(std::vector<double> coeffs);  // NOLINT: implicit from coefficient list
  static Polynomial constant(double c);
  static Polynomial monomial(double c, int degree);

  const std::vector<double>& coeffs() const { return c_; }
  bool is_zero() const { return c_.empty(); }
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  double coeff(int k) const;
  double max_abs_coeff() const;

  double operator()(double x) const;
  Polynomial derivative() const;

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);

 private:
  void trim();
  std::vector<double> c_;
};

Polynomial operator+(Polynomial a, const Polynomial& b);
Polynomial operator-(Polynomial a, const Polynomial& b);
Polynomial operator*(const Polynomial& a, const Polynomial& b);
Polynomial operator*(double s, const Polynomial& a);

/// Multiplicities of the allowed denominator factors x, (x − 1), (x + 1).
struct PoleOrders {
  int at_zero = 0;
  int at_plus_one = 0;
  int at_minus_one = 0;
  friend bool operator==(const PoleOrders&, const PoleOrders&) = default;
};

/// numerator / (x^i (x − 1)^j (x + 1)^k). The denominator is monic by
/// construction. A factor shared with the numerator is cancelled when the
/// numerator vanishes exactly at its root.
class RationalCoefficient {
 public:
  RationalCoefficient() = default;
  RationalCoefficient(Polynomial numerator, PoleOrders poles = {});
  RationalCoefficient(double c);  // NOLINT: constants convert implicitly

  /// Throws std::invalid_argument unless `denominator` is a nonzero multiple
  /// of a product of x, (x − 1), (x + 1) powers. The constant factor is
  /// moved into the numerator.
  static RationalCoefficient from_polynomials(const Polynomial& numerator,
                                              const Polynomial& denominator);

  const Polynomial& numerator() const { return num_; }
  const PoleOrders& poles() const { return poles_; }
  Polynomial denominator() const;
  bool is_zero() const { return num_.is_zero(); }

  bool has_pole_at(double x) const;
  /// Throws std::domain_error at a pole.
  double operator()(double x) const;
  RationalCoefficient derivative() const;

 private:
  void cancel_common_factors();
  Polynomial num_;
  PoleOrders poles_;
};

RationalCoefficient operator+(const RationalCoefficient& a, const RationalCoefficient& b);
RationalCoefficient operator-(const RationalCoefficient& a, const RationalCoefficient& b);
RationalCoefficient operator*(const RationalCoefficient& a, const RationalCoefficient& b);

/// Σ_k c_k(x) ∂^k. Zero coefficients are never stored.
class DiffOperator {
 public:
  DiffOperator() = default;

  static DiffOperator identity();
  static DiffOperator multiplication(const RationalCoefficient& f);
  /// c(x) ∂^order
  static DiffOperator term(int order, const RationalCoefficient& c);
  static DiffOperator derivative(int order = 1);

  const std::map<int, RationalCoefficient>& terms() const { return terms_; }
  /// Coefficient of ∂^order; zero if absent.
  RationalCoefficient coefficient(int order) const;
  int order() const;  // -1 for the zero operator
  bool is_zero() const { return terms_.empty(); }

  /// Σ_k c_k f^{(k)}
  RationalCoefficient apply(const RationalCoefficient& f) const;

  void add_term(int order, const RationalCoefficient& c);

 private:
  std::map<int, RationalCoefficient> terms_;
};

DiffOperator op_add(const DiffOperator& p, const DiffOperator& q);
DiffOperator op_scale(double c, const DiffOperator& p);
/// p ∘ q, normal ordered by the Leibniz rule.
DiffOperator op_compose(const DiffOperator& p, const DiffOperator& q);
DiffOperator anticommutator(const DiffOperator& p, const DiffOperator& q);

DiffOperator operator+(const DiffOperator& p, const DiffOperator& q);
DiffOperator operator-(const DiffOperator& p, const DiffOperator& q);
DiffOperator operator*(double c, const DiffOperator& p);
DiffOperator operator*(const DiffOperator& p, const DiffOperator& q);

/// Largest coefficient of num_p·den_q − num_q·den_p over all orders, divided
/// by max(1, largest coefficient of either cross product).
double op_difference(const DiffOperator& p, const DiffOperator& q);
bool op_equal(const DiffOperator& p, const DiffOperator& q, double tol);

struct BoundaryCheck {
  double endpoint = 0.0;
  bool pole = false;           // a coefficient is singular here; not evaluated
  double leading_value = 0.0;  // A(e)
  double slope_mismatch = 0.0; // B(e) − A'(e)
  bool passed = false;
};

/// For an operator A∂² + B∂ + C, checks A(e) = 0 and B(e) = A'(e) at each
/// endpoint, relative to max(1, |A'(e)|, |B(e)|) with tolerance `tol`.
/// Throws std::invalid_argument when the order exceeds 2.
std::vector<BoundaryCheck> boundary_commutation_check(const DiffOperator& m,
                                                      std::span<const double> endpoints,
                                                      double tol = 1e-12);

}  // namespace heunband
