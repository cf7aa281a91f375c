#include "w1plus/polynomial.hpp"

#include <algorithm>
#include <cmath>

namespace w1plus {

Polynomial::Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) {
  while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
}

Polynomial Polynomial::constant(double value) {
  return value == 0.0 ? Polynomial{} : Polynomial{{value}};
}

int Polynomial::degree() const { return static_cast<int>(c_.size()) - 1; }

double Polynomial::coefficient(std::size_t k) const {
  return k < c_.size() ? c_[k] : 0.0;
}

double Polynomial::operator()(double t) const {
  long double acc = 0.0L;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * t + *it;
  return static_cast<double>(acc);
}

Polynomial Polynomial::derivative() const {
  if (c_.size() <= 1) return {};
  std::vector<double> d(c_.size() - 1);
  for (std::size_t k = 1; k < c_.size(); ++k)
    d[k - 1] = static_cast<double>(k) * c_[k];
  return Polynomial(std::move(d));
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), 0.0);
  for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] += o.c_[k];
  while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
  if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), 0.0);
  for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] -= o.c_[k];
  while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
  return *this;
}

Polynomial& Polynomial::operator*=(double s) {
  for (double& v : c_) v *= s;
  if (s == 0.0) c_.clear();
  return *this;
}

Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.c_.empty() || b.c_.empty()) return {};
  std::vector<long double> acc(a.c_.size() + b.c_.size() - 1, 0.0L);
  for (std::size_t i = 0; i < a.c_.size(); ++i) {
    for (std::size_t j = 0; j < b.c_.size(); ++j) {
      acc[i + j] += static_cast<long double>(a.c_[i]) * b.c_[j];
    }
  }
  std::vector<double> out(acc.size());
  for (std::size_t k = 0; k < acc.size(); ++k) out[k] = static_cast<double>(acc[k]);
  return Polynomial(std::move(out));
}

Polynomial operator*(Polynomial a, double s) { return a *= s; }

double Polynomial::max_abs_coefficient() const {
  double m = 0.0;
  for (double v : c_) m = std::max(m, std::abs(v));
  return m;
}

void Polynomial::trim(double tol_abs) {
  while (!c_.empty() && std::abs(c_.back()) <= tol_abs) c_.pop_back();
}

Polynomial Polynomial::from_one_minus_t(const std::vector<double>& s_coeffs) {
  // sum_k c_k (1-t)^k: expand each power with binomial coefficients.
  std::vector<long double> acc;
  std::vector<long double> binom{1.0L};  // row k of Pascal's triangle
  for (std::size_t k = 0; k < s_coeffs.size(); ++k) {
    if (acc.size() < k + 1) acc.resize(k + 1, 0.0L);
    if (s_coeffs[k] != 0.0) {
      long double sign = 1.0L;
      for (std::size_t j = 0; j <= k; ++j) {
        acc[j] += sign * binom[j] * s_coeffs[k];
        sign = -sign;
      }
    }
    // Advance Pascal's triangle row.
    binom.push_back(0.0L);
    for (std::size_t j = binom.size() - 1; j > 0; --j) binom[j] += binom[j - 1];
  }
  std::vector<double> out(acc.size());
  for (std::size_t k = 0; k < acc.size(); ++k) out[k] = static_cast<double>(acc[k]);
  return Polynomial(std::move(out));
}

}  // namespace w1plus
