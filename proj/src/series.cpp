#include "blowup_lab/series.hpp"

#include <algorithm>
#include <cmath>

#include "blowup_lab/errors.hpp"

namespace blab {

Series Series::monomial(int power, double c, int terms) {
  std::vector<double> a(std::max(terms, 1), 0.0);
  a[0] = c;
  return {power, a};
}

double Series::eval(double y) const {
  double s = 0.0;
  for (int j = terms() - 1; j >= 0; --j) s = s * y + a[j];
  return s * std::pow(y, p);
}

double Series::coeff(int power) const {
  int j = power - p;
  return (j >= 0 && j < terms()) ? a[j] : 0.0;
}

int Series::leading_power(double rel) const {
  double m = 0.0;
  for (double c : a) m = std::max(m, std::abs(c));
  if (m == 0.0) return order();
  for (int j = 0; j < terms(); ++j)
    if (std::abs(a[j]) > rel * m) return p + j;
  return order();
}

Series Series::deriv() const {
  std::vector<double> b(a.size());
  for (int j = 0; j < terms(); ++j) b[j] = (p + j) * a[j];
  return {p - 1, b};
}

Series Series::antideriv() const {
  std::vector<double> b(a.size());
  for (int j = 0; j < terms(); ++j) {
    int q = p + j + 1;
    if (q == 0) {
      if (a[j] != 0.0) throw Error(ErrorKind::singularity, "y^-1 term in series antiderivative");
      b[j] = 0.0;
    } else {
      b[j] = a[j] / q;
    }
  }
  return {p + 1, b};
}

Series Series::shift(int k) const { return {p + k, a}; }

Series Series::truncated(int max_order) const {
  int n = std::clamp(max_order - p, 0, terms());
  return {p, std::vector<double>(a.begin(), a.begin() + n)};
}

Series Series::operator-() const { return -1.0 * (*this); }

Series operator+(const Series& f, const Series& g) {
  if (f.empty()) return g;
  if (g.empty()) return f;
  int p = std::min(f.p, g.p);
  int top = std::min(f.order(), g.order());
  std::vector<double> a(std::max(top - p, 0), 0.0);
  for (int q = p; q < top; ++q) a[q - p] = f.coeff(q) + g.coeff(q);
  return {p, a};
}

Series operator-(const Series& f, const Series& g) { return f + (-1.0 * g); }

Series operator*(double c, const Series& f) {
  Series r = f;
  for (double& x : r.a) x *= c;
  return r;
}

Series operator*(const Series& f, const Series& g) {
  if (f.empty() || g.empty()) return {};
  int n = std::min(f.terms(), g.terms());
  std::vector<double> a(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; i + j < n; ++j) a[i + j] += f.a[i] * g.a[j];
  return {f.p + g.p, a};
}

Series divide(const Series& f, const Series& g) {
  int q = g.leading_power(0.0);
  if (q >= g.order()) throw Error(ErrorKind::singularity, "division by a vanishing series");
  int off = q - g.p;
  int ng = g.terms() - off;
  int n = std::min(f.terms(), ng);
  std::vector<double> h(n, 0.0);
  for (int m = 0; m < n; ++m) {
    double s = f.a[m];
    for (int k = 1; k <= m; ++k) s -= g.a[off + k] * h[m - k];
    h[m] = s / g.a[off];
  }
  return {f.p - q, h};
}

namespace {

void sin_cos(const Series& g, std::vector<double>& s, std::vector<double>& c) {
  if (g.p < 0) throw Error(ErrorKind::singularity, "sin/cos of a series with negative powers");
  int n = g.order();
  std::vector<double> b(n, 0.0);
  for (int j = 0; j < g.terms(); ++j) b[g.p + j] = g.a[j];
  s.assign(n, 0.0);
  c.assign(n, 0.0);
  s[0] = std::sin(b[0]);
  c[0] = std::cos(b[0]);
  for (int m = 1; m < n; ++m) {
    double ss = 0.0, cc = 0.0;
    for (int k = 1; k <= m; ++k) {
      ss += k * b[k] * c[m - k];
      cc -= k * b[k] * s[m - k];
    }
    s[m] = ss / m;
    c[m] = cc / m;
  }
}

}  // namespace

Series sin_of(const Series& g) {
  std::vector<double> s, c;
  sin_cos(g, s, c);
  return {0, s};
}

Series cos_of(const Series& g) {
  std::vector<double> s, c;
  sin_cos(g, s, c);
  return {0, c};
}

}  // namespace blab
