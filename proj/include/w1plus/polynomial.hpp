#pragma once

#include <cstddef>
#include <vector>

namespace w1plus {

/**
 * Dense univariate polynomial with double coefficients in the monomial
 * basis. Arithmetic accumulates in long double. The zero polynomial is the
 * empty coefficient list (degree -1).
 */
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs);
  static Polynomial constant(double value);

  int degree() const;  // -1 for the zero polynomial
  const std::vector<double>& coefficients() const { return c_; }
  double coefficient(std::size_t k) const;  // 0 beyond the stored degree

  double operator()(double t) const;  // Horner evaluation
  Polynomial derivative() const;

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  Polynomial& operator*=(double s);
  friend Polynomial operator+(Polynomial a, const Polynomial& b);
  friend Polynomial operator-(Polynomial a, const Polynomial& b);
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(Polynomial a, double s);

  double max_abs_coefficient() const;
  /** Drops trailing coefficients of magnitude <= tol_abs. */
  void trim(double tol_abs = 0.0);

  /**
   * Reinterprets `s_coeffs` as coefficients in the variable s = 1 - t and
   * returns the same polynomial in the variable t (binomial expansion).
   */
  static Polynomial from_one_minus_t(const std::vector<double>& s_coeffs);

 private:
  std::vector<double> c_;
};

}  // namespace w1plus
