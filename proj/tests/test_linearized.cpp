#include <cmath>

#include "bench.hpp"
#include "blowup_lab/errors.hpp"
#include "blowup_lab/linearized.hpp"
#include "blowup_lab/profiles.hpp"
#include "doctest.h"

using namespace blab;

namespace {

// y^p exp(-y^q) with its origin expansion, q in {1, 2}
RadialProfile y_exp(GridPtr g, int p, int q) {
  std::vector<double> a(64, 0.0);
  double f = 1;
  for (int j = 0; q * j < 64; ++j) {
    a[q * j] = f;
    f *= -1.0 / (j + 1);
  }
  return sample(g, [p, q](double y) { return std::pow(y, p) * std::exp(-std::pow(y, q)); }, Series(p, a));
}

double rel_max(const RadialProfile& f, const RadialProfile& ref, double lo, double hi) {
  return max_abs_on(f, lo, hi) / max_abs_on(ref, lo, hi);
}

}  // namespace

TEST_SUITE("linearized") {

TEST_CASE("LQ spans the kernel of A and L") {
  const auto& c = *bench().context();
  CHECK(rel_max(apply_A(c, c.LQ), c.LQ, 0, 1e4) <= 1e-8);
  CHECK(kernel_residual(c) <= 1e-8);
}

TEST_CASE("L equals A* A") {
  const auto& c = *bench().context();
  CHECK(composition_error(c, y_exp(c.grid, 3, 1)) <= 1e-6);
}

TEST_CASE("A* is the adjoint of A") {
  const auto& c = *bench().context();
  CHECK(adjoint_error(c, y_exp(c.grid, 1, 2), y_exp(c.grid, 3, 1)) <= 1e-7);
}

TEST_CASE("Wronskian of Gamma and LQ") {
  CHECK(wronskian_error(*bench().context()) <= 1e-6);
}

TEST_CASE("Gamma asymptotics") {
  const auto& c = *bench().context();
  int i0 = c.grid->index_at_least(1e-3), i1 = c.grid->index_at_least(1e3);
  CHECK(std::abs(c.Gamma[i0]) * std::pow(c.Gamma.y(i0), 6) == doctest::Approx(1.0 / 7).epsilon(1e-2));
  CHECK(std::abs(c.Gamma[i1]) * std::pow(c.Gamma.y(i1), 3) == doctest::Approx(1 / (2 * c.a0)).epsilon(1e-2));
}

TEST_CASE("inverting LQ gives -T1 with the constant tail") {
  const auto& c = *bench().context();
  auto inv = invert_L(c, c.LQ);
  auto t = fit_powers(inv.w, 1e3, 5e3, {0.0, -1.0, -2.0});
  CHECK(t[0] == doctest::Approx(-c.a0 / 3).epsilon(1e-2));
  CHECK(t[1] == doctest::Approx(1.5 * c.a1).epsilon(1e-2));
  CHECK(rel_max(inv.Aw - apply_A(c, inv.w), inv.Aw, 1e-2, 1e3) <= 1e-6);
}

TEST_CASE("round trip through the inverse") {
  const auto& c = *bench().context();
  auto f = y_exp(c.grid, 1, 2);
  auto back = apply_L(c, invert_L(c, f).w);
  CHECK(norm(back - f) <= 1e-6 * norm(f));
}

TEST_CASE("inverse raises the admissible degree by one") {
  const auto& c = *bench().context();
  auto rep0 = check_admissible(c.LQ, 0, 0);
  CHECK(rep0.ok);
  auto w = invert_L(c, c.LQ).w;
  auto rep = check_admissible(w, 1, 1);
  CHECK(rep.ok);
  CHECK(rep.origin_power == 3);
  CHECK(std::abs(rep.tail_slopes[0]) <= 2e-2);
}

TEST_CASE("adapted derivatives") {
  auto lc = leibniz_context();
  auto k = adapted_derivatives(lc, lc.LQ, 4);
  REQUIRE(k.size() == 5);
  for (int i = 1; i <= 4; ++i) CHECK(rel_max(k[i], lc.LQ, 1e-2, 1e2) <= 1e-6);
  const auto& c = *bench().context();
  auto f = y_exp(c.grid, 1, 2);
  auto a = adapted_derivatives(c, f, 2);
  CHECK(rel_max(a[2] - apply_L(c, f), apply_L(c, f), 1e-3, 1e3) <= 1e-6);
  auto z = adapted_derivatives(c, f, 0);
  REQUIRE(z.size() == 1);
  CHECK(z[0].v == f.v);
}

TEST_CASE("Leibniz recurrence with the identity multiplier") {
  const auto& c = *bench().context();
  auto one = sample(c.grid, [](double) { return 1.0; }, Series::constant(1.0, 48));
  CHECK(leibniz_consistency(c, one, y_exp(c.grid, 1, 2), 0) <= 1e-10);
}

TEST_CASE("Leibniz recurrence against direct powers") {
  auto c = leibniz_context();
  std::vector<double> a(64, 0.0);
  for (int j = 0; 2 * j < 64; ++j) a[2 * j] = j % 2 ? -1.0 : 1.0;
  auto phi = sample(c.grid, [](double y) { return 1 / (1 + y * y); }, Series(0, a));
  CHECK(leibniz_consistency(c, phi, y_exp(c.grid, 1, 1), 1) <= 1e-5);
  CHECK(leibniz_consistency(c, phi, y_exp(c.grid, 1, 2), 0) <= 1e-6);
  CHECK(leibniz_probe(0) <= 1e-6);
}

TEST_CASE("preconditions") {
  const auto& c = *bench().context();
  CHECK_THROWS_AS(leibniz_consistency(c, c.LQ, c.LQ, 4), Error);
  CHECK_THROWS_AS(build_PhiM(c, 5.0, 1, {c.LQ, c.LQ}), Error);
  ShootOptions o;
  o.y_max = 1e3;
  o.n = 2048;
  CHECK_THROWS_AS(build_context(solve_Q(5, o)), Error);
}

}
