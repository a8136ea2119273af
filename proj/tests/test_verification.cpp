#include <cmath>

#include "bench.hpp"
#include "blowup_lab/cutoff.hpp"
#include "blowup_lab/errors.hpp"
#include "blowup_lab/verification.hpp"
#include "doctest.h"

using namespace blab;

namespace {

// f = y^beta (1 - y) on [0, 1] with 2 beta + (d - 1 - 2i) = 1 + 2 eps: closed-form margin
double extremal_margin(int d, int i, double eps) {
  double b0 = -(d - 2.0 - 2 * i) / 2, b = b0 + eps, p = 2 * eps;
  double lhs = b * b / p - 2 * b * (b + 1) / (p + 1) + (b + 1) * (b + 1) / (p + 2);
  double rhs = b0 * b0 * (1 / p - 2 / (p + 1) + 1 / (p + 2));
  return (lhs - rhs) / std::max(lhs, rhs);
}

const PhiBasis& basis50() {
  static PhiBasis b = make_phi_basis(bench().family(), 50.0);
  return b;
}

}  // namespace

TEST_SUITE("verification") {

TEST_CASE("Hardy at the origin holds on random samples") {
  for (int i = 0; i <= 2; ++i) {
    auto r = hardy_origin_probe(7, i, 1000, 1);
    CHECK_MESSAGE(r.failures.empty(), "i = " << i);
    CHECK(r.min_margin >= 0);
    CHECK(r.margins.size() == 1000);
  }
}

TEST_CASE("exterior and critical Hardy hold on random samples") {
  for (double a : {1.0, 3.0}) CHECK(hardy_exterior_probe(7, a, 1000, 1).failures.empty());
  CHECK(hardy_critical_probe(7, 1000, 1).failures.empty());
}

TEST_CASE("near-extremal family approaches the sharp constant") {
  const int d = 7;
  for (int i = 0; i <= 2; ++i) {
    double prev = 2.0;
    for (double eps : {0.5, 0.2, 0.1, 0.05}) {
      double b = -(d - 2.0 - 2 * i) / 2 + eps;
      auto f = [b](double y) { return std::pow(y, b) * (1 - y); };
      auto df = [b](double y) { return b * std::pow(y, b - 1) - (b + 1) * std::pow(y, b); };
      double m = hardy_origin_margin(d, i, f, df);
      CHECK(m == doctest::Approx(extremal_margin(d, i, eps)).epsilon(1e-6));
      CHECK(m >= 0);
      CHECK(m < prev);
      prev = m;
    }
    // below eps = 0.05 the mass near y = 0 sits beyond double range; the oracle carries the limit
    CHECK(prev < 0.2);
    CHECK(extremal_margin(d, i, 1e-6) < 1e-4);
  }
}

TEST_CASE("zero function has margin zero") {
  auto z = [](double) { return 0.0; };
  CHECK(hardy_origin_margin(7, 0, z, z) == 0.0);
  CHECK(hardy_exterior_margin(7, 1.0, z, z) == 0.0);
  CHECK(hardy_critical_margin(7, z, z) == 0.0);
}

TEST_CASE("margins are invariant under f -> c f") {
  auto bump = [](double y) { return y > 2 && y < 3 ? std::pow(std::sin(std::acos(-1.0) * (y - 2)), 4) : 0.0; };
  auto dbump = [](double y) {
    const double pi = std::acos(-1.0);
    if (!(y > 2 && y < 3)) return 0.0;
    double s = std::sin(pi * (y - 2));
    return 4 * pi * s * s * s * std::cos(pi * (y - 2));
  };
  double m1 = hardy_exterior_margin(7, 1.0, bump, dbump);
  double m2 = hardy_exterior_margin(7, 1.0, [&](double y) { return 1e-3 * bump(y); },
                                    [&](double y) { return 1e-3 * dbump(y); });
  CHECK(m1 > 0);
  CHECK(m2 == doctest::Approx(m1).epsilon(1e-10));
}

TEST_CASE("Hardy parameter checks") {
  auto z = [](double y) { return y; };
  CHECK_THROWS_AS(hardy_origin_margin(7, 3, z, z), Error);
  CHECK_THROWS_AS(hardy_exterior_margin(7, 2.5, z, z), Error);
}

TEST_CASE("seeded test functions are reproducible") {
  auto a = random_test_function(42, true), b = random_test_function(42, true);
  CHECK(a.p == b.p);
  CHECK(a.sigma == b.sigma);
  CHECK(a(1.0) == doctest::Approx(0.0).epsilon(1e-12));
  auto r1 = hardy_origin_probe(7, 0, 20, 9), r2 = hardy_origin_probe(7, 0, 20, 9);
  CHECK(r1.margins == r2.margins);
}

TEST_CASE("test function derivative") {
  auto f = random_test_function(3, false);
  const double h = 1e-5;
  for (double y : {0.3, 1.0, 4.0}) CHECK(f.deriv(y) == doctest::Approx((f(y + h) - f(y - h)) / (2 * h)).epsilon(1e-6));
}

TEST_CASE("projection removes the Phi_M directions") {
  const auto& c = *bench().context();
  auto f = sample_test_function(c.grid, random_test_function(5, false));
  auto g = project_out(f, basis50(), 1);
  CHECK(projection_residual(g, basis50(), 1) <= 1e-10);
  CHECK(projection_residual(g, basis50(), 1) <= 1e-6 * projection_residual(f, basis50(), 1));
}

TEST_CASE("coercivity constants are positive") {
  const auto& c = *bench().context();
  for (auto op : {CoerOp::Astar, CoerOp::L, CoerOp::Lk}) {
    CoercivityOptions o;
    o.op = op;
    o.samples = 200;
    auto r = coercivity_probe(c, basis50(), o);
    CHECK(r.failures.empty());
    CHECK(r.min_margin > 0);
    if (op != CoerOp::Astar) CHECK(r.projection_residual <= 1e-8);
  }
}

TEST_CASE("unprojected kernel direction defeats coercivity") {
  const auto& c = *bench().context();
  auto f = cutoff_profile(c.grid, 50.0) * c.LQ;
  CoercivityOptions o;
  o.op = CoerOp::L;
  double kernel = coercivity_ratio(c, o, f);
  o.samples = 200;
  auto typical = coercivity_probe(c, basis50(), o);
  MESSAGE("kernel ratio " << kernel << " projected minimum " << typical.min_margin);
  CHECK(kernel <= 1e-2 * typical.min_margin);
}

}
