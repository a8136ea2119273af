#pragma once

#include <vector>

#include "blowup_lab/grid.hpp"

namespace blab {

struct ShootOptions {
  double y_min = 1e-4;
  double y_max = 1e4;
  int n = 8192;
  double y0 = 1e-3;
  int series_degree = 9;
  // odd degree of the origin series attached to Q for operator algebra
  int origin_degree = 41;
  double atol = 1e-12;
  double rtol = 1e-10;
  double slope = 1.0;
  double tail_a = 1e2;
  double tail_b = 1e3;
};

struct ShootMetadata {
  double y0 = 0.0;
  double atol = 0.0;
  double rtol = 0.0;
  double y_end = 0.0;
};

struct StationaryMap {
  int d = 7;
  RadialProfile Q;
  RadialProfile LQ;  // y Q'
  std::vector<double> origin_coeffs;  // coefficients of y, y^3, y^5, ...
  double gamma_fit = 0.0;
  double a0 = 0.0;
  double a1 = 0.0;
  ShootMetadata meta;
};

double gamma_exponent(int d);
// odd Taylor coefficients q_1 = slope, q_3, ..., q_degree by power matching
std::vector<double> taylor_coefficients(int d, int degree, double slope = 1.0, double drift = 0.0);
StationaryMap solve_Q(int d, const ShootOptions& opts = {});

struct TailConstants {
  double a0 = 0.0;
  double a1 = 0.0;
  double a2 = 0.0;
};

TailConstants extract_tail_constants(const StationaryMap& Q, double y_a = 1e2, double y_b = 1e3);
// same fit applied to an arbitrary pi/2 - Q style profile
TailConstants fit_tail_constants(const RadialProfile& deficit, double y_a, double y_b);
RadialProfile lambda_Q(const StationaryMap& Q);
// pointwise residual of the ground state equation divided by 1 + |Q''|, from Q and yQ'
RadialProfile ode_residual(const RadialProfile& Q, const RadialProfile& LQ, int d);

struct ShrinkerResult {
  double slope = 0.0;
  int intersections = 0;
  int diverge_sign = 0;  // +1 / -1 for phi -> +-infinity, 0 if bounded up to y_end
  bool regular = false;  // bisection limit between opposite divergence signs
  double y_reached = 0.0;
};

ShrinkerResult shoot_shrinker(int d, double slope, double y_end = 20.0);
std::vector<ShrinkerResult> solve_shrinker(int d, const std::vector<double>& slopes);

}  // namespace blab
