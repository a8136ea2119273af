#pragma once

#include <vector>

namespace blab {

// Truncated expansion sum_j a[j] * y^(p + j).
struct Series {
  int p = 0;
  std::vector<double> a;

  Series() = default;
  Series(int power, std::vector<double> coeffs) : p(power), a(std::move(coeffs)) {}

  static Series monomial(int power, double c, int terms);
  static Series constant(double c, int terms) { return monomial(0, c, terms); }

  bool empty() const { return a.empty(); }
  int terms() const { return static_cast<int>(a.size()); }
  // one past the highest power kept
  int order() const { return p + terms(); }
  double eval(double y) const;
  double coeff(int power) const;
  // lowest power whose coefficient exceeds rel * max|a|
  int leading_power(double rel = 1e-12) const;

  Series deriv() const;
  Series antideriv() const;
  Series shift(int k) const;
  Series truncated(int max_order) const;
  Series operator-() const;
};

Series operator+(const Series& f, const Series& g);
Series operator-(const Series& f, const Series& g);
Series operator*(const Series& f, const Series& g);
Series operator*(double c, const Series& f);
Series divide(const Series& f, const Series& g);
Series sin_of(const Series& g);
Series cos_of(const Series& g);

}  // namespace blab
