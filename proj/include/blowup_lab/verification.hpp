#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "blowup_lab/profiles.hpp"

namespace blab {

struct ProbeReport {
  std::string id;
  int samples = 0;
  double min_margin = 0.0;  // Hardy: (LHS - RHS) / LHS; coercivity: inf of LHS / RHS
  std::vector<std::uint64_t> failures;
  std::vector<double> margins;
  double projection_residual = 0.0;  // max |<f, L^m Phi_M>| / (|f| |L^m Phi_M|) after projection
};

// f(y) = y^3 (P(y / sigma) - c) exp(-(y / sigma)^2), deg P <= 6, sigma log-uniform in [0.5, 50];
// c = P(1 / sigma) and deg P >= 1 when vanish_at_one, else c = 0
struct TestFunction {
  std::vector<double> p;
  double sigma = 1.0;
  double shift = 0.0;
  double operator()(double y) const;
  double deriv(double y) const;
  // odd-free expansion at the origin, for operator algebra
  Series origin(int terms = 24) const;
};

TestFunction random_test_function(std::uint64_t seed, bool vanish_at_one);
RadialProfile sample_test_function(GridPtr g, const TestFunction& f);

using Fn = std::function<double(double)>;

// normalized margins of a single function; 0 when both sides vanish
double hardy_origin_margin(int d, int i, const Fn& f, const Fn& df);
double hardy_exterior_margin(int d, double alpha, const Fn& f, const Fn& df);
double hardy_critical_margin(int d, const Fn& f, const Fn& df);

// sample k uses seed + k
ProbeReport hardy_origin_probe(int d, int i, int samples, std::uint64_t seed = 1);
ProbeReport hardy_exterior_probe(int d, double alpha, int samples, std::uint64_t seed = 1);
ProbeReport hardy_critical_probe(int d, int samples, std::uint64_t seed = 1);

enum class CoerOp { Astar, L, Lk };

struct CoercivityOptions {
  CoerOp op = CoerOp::Lk;
  int k = 1;           // weight exponent for L, iterate index for Lk (E_(2k+2))
  int i = 0;
  double alpha = 1.0;  // weight exponent for Astar
  int samples = 1000;
  std::uint64_t seed = 1;
  bool project = true;
};

// orthogonalize against L^m Phi_M, m = 0..m_max, by a Gram solve
RadialProfile project_out(const RadialProfile& f, const PhiBasis& basis, int m_max);
double projection_residual(const RadialProfile& f, const PhiBasis& basis, int m_max);

// LHS / RHS of the coercivity estimate for one function (no projection applied)
double coercivity_ratio(const LinearizedContext& c, const CoercivityOptions& o, const RadialProfile& f);

// basis.L must be >= k for the Lk probe
ProbeReport coercivity_probe(const LinearizedContext& c, const PhiBasis& basis, const CoercivityOptions& o);

}  // namespace blab
