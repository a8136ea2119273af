#include "blowup_lab/cutoff.hpp"

#include <cmath>

namespace blab {

namespace {

// chi = 1 / (1 + e^phi) with phi = 1/(2-x) - 1/(x-1) on (1,2)
double phi(double x) { return 1.0 / (2.0 - x) - 1.0 / (x - 1.0); }
double phi1(double x) { return 1.0 / ((x - 1.0) * (x - 1.0)) + 1.0 / ((2.0 - x) * (2.0 - x)); }
double phi2(double x) { return -2.0 / std::pow(x - 1.0, 3) + 2.0 / std::pow(2.0 - x, 3); }

// chi and chi(1 - chi), evaluated without overflow
void logistic(double x, double& c, double& c1mc) {
  double p = phi(x);
  if (p > 0) {
    double e = std::exp(-p);
    c = e / (1.0 + e);
    c1mc = e / ((1.0 + e) * (1.0 + e));
  } else {
    double e = std::exp(p);
    c = 1.0 / (1.0 + e);
    c1mc = e / ((1.0 + e) * (1.0 + e));
  }
}

}  // namespace

double chi(double x) {
  if (x <= 1.0) return 1.0;
  if (x >= 2.0) return 0.0;
  double c, s;
  logistic(x, c, s);
  return c;
}

double chi_d1(double x) {
  if (x <= 1.0 || x >= 2.0) return 0.0;
  double c, s;
  logistic(x, c, s);
  return -s * phi1(x);
}

double chi_d2(double x) {
  if (x <= 1.0 || x >= 2.0) return 0.0;
  double c, s;
  logistic(x, c, s);
  double p1 = phi1(x);
  double d1 = -s * p1;
  return -(d1 * (1.0 - 2.0 * c) * p1 + s * phi2(x));
}

}  // namespace blab
