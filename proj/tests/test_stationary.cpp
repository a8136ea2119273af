#include <cmath>
#include <numbers>

#include "bench.hpp"
#include "blowup_lab/cutoff.hpp"
#include "blowup_lab/errors.hpp"
#include "blowup_lab/profiles.hpp"
#include "blowup_lab/stationary.hpp"
#include "doctest.h"

using namespace blab;

namespace {

std::vector<double> log_slopes(double lo, double hi, int n) {
  std::vector<double> s;
  for (int i = 0; i < n; ++i) s.push_back(lo * std::pow(hi / lo, i / (n - 1.0)));
  return s;
}

std::vector<ShrinkerResult> regular_only(const std::vector<ShrinkerResult>& all) {
  std::vector<ShrinkerResult> r;
  for (auto& x : all)
    if (x.regular) r.push_back(x);
  return r;
}

}  // namespace

TEST_SUITE("stationary") {

TEST_CASE("gamma exponent") {
  CHECK(gamma_exponent(7) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(gamma_exponent(8) == doctest::Approx((6 - std::sqrt(8.0)) / 2).epsilon(1e-14));
  CHECK(gamma_exponent(8) == doctest::Approx(1.585786).epsilon(1e-6));
  try {
    gamma_exponent(6);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::domain);
  }
}

TEST_CASE("d = 2 shooting matches 2 arctan y") {
  ShootOptions o;
  o.slope = 2.0;
  auto m = solve_Q(2, o);
  double e = 0;
  for (int i = 0; i < m.Q.size() && m.Q.y(i) <= 50; ++i) e = std::max(e, std::abs(m.Q[i] - 2 * std::atan(m.Q.y(i))));
  CHECK(e <= 1e-6);
}

TEST_CASE("Taylor coefficients of 2 arctan y") {
  // 2 arctan y = 2 (y - y^3/3 + y^5/5 - ...)
  auto c = taylor_coefficients(2, 9, 2.0);
  REQUIRE(c.size() == 5);
  for (int j = 0; j < 5; ++j) CHECK(c[j] == doctest::Approx(2.0 * (j % 2 ? -1 : 1) / (2 * j + 1)).epsilon(1e-12));
}

TEST_CASE("d = 7 ground state approaches pi/2 with exponent -2") {
  const auto& m = bench().Q7();
  CHECK(std::abs(m.Q.at(1e4) - std::numbers::pi / 2) <= 1e-6);
  CHECK(std::abs(m.gamma_fit - 2) <= 1e-2);
  CHECK(m.a0 > 0);
  CHECK(m.a1 > 0);
}

TEST_CASE("tail constant fit on an exact model") {
  auto g = make_log_grid(1e-3, 1e4, 4096, 1.0);
  auto deficit = sample(g, [](double y) { return std::numbers::pi / 2 - (std::numbers::pi / 2 - 3 / (y * y) + 5 / (y * y * y)); });
  auto t = fit_tail_constants(deficit, 1e2, 1e3);
  CHECK(t.a0 == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(t.a1 == doctest::Approx(5.0).epsilon(1e-8));
}

TEST_CASE("a0 is stable when the window moves by a decade") {
  const auto& m = bench().Q7();
  auto t1 = extract_tail_constants(m, 1e2, 1e3);
  auto t2 = extract_tail_constants(m, 1e3, 1e4);
  CHECK(std::abs(t2.a0 / t1.a0 - 1) <= 1e-3);
}

TEST_CASE("LQ is positive and y^2 LQ tends to 2 a0") {
  const auto& m = bench().Q7();
  auto lq = lambda_Q(m);
  for (int i = 0; i < lq.size(); ++i) CHECK(lq[i] > 0);
  int i = lq.grid->index_at_least(5e3);
  CHECK(lq.y(i) * lq.y(i) * lq[i] == doctest::Approx(2 * m.a0).epsilon(1e-2));
}

TEST_CASE("ground state equation residual") {
  const auto& m = bench().Q7();
  auto r = ode_residual(m.Q, m.LQ, 7);
  CHECK(max_abs_on(r, 1e-3, 1e3) <= 1e-6);
}

TEST_CASE("d = 5 has a regular shrinker with one crossing") {
  auto reg = regular_only(solve_shrinker(5, log_slopes(0.01, 100, 41)));
  REQUIRE_FALSE(reg.empty());
  CHECK(reg.front().intersections == 1);
}

TEST_CASE("d = 7 has no regular shrinker") {
  auto reg = regular_only(solve_shrinker(7, log_slopes(0.01, 100, 41)));
  CHECK(reg.empty());
}

TEST_CASE("d = 4 has shrinkers with one and two crossings") {
  auto reg = regular_only(solve_shrinker(4, log_slopes(0.01, 100, 41)));
  REQUIRE(reg.size() >= 2);
  CHECK(reg[0].intersections == 1);
  CHECK(reg[1].intersections == 2);
}

}

TEST_SUITE("cutoff") {

TEST_CASE("chi is one below 1 and zero beyond 2") {
  for (double x : {0.0, 0.3, 0.999, 1.0}) CHECK(chi(x) == 1.0);
  for (double x : {2.0, 2.5, 100.0}) CHECK(chi(x) == 0.0);
  auto g = make_log_grid(1e-2, 1e3, 512, 1.0);
  const double M = 20;
  auto c = cutoff_profile(g, M);
  for (int i = 0; i < c.size(); ++i) {
    if (c.y(i) <= M) CHECK(c[i] == 1.0);
    if (c.y(i) >= 2 * M) CHECK(c[i] == 0.0);
  }
}

TEST_CASE("chi is nonincreasing on [1, 2]") {
  double prev = chi(1.0);
  for (int i = 1; i <= 1000; ++i) {
    double v = chi(1.0 + i / 1000.0);
    CHECK(v - prev <= 0.0);
    prev = v;
  }
}

TEST_CASE("chi derivatives agree with differences") {
  const double h = 1e-5;
  for (double x : {1.1, 1.37, 1.5, 1.8}) {
    CHECK(chi_d1(x) == doctest::Approx((chi(x + h) - chi(x - h)) / (2 * h)).epsilon(1e-6));
    CHECK(chi_d2(x) == doctest::Approx((chi_d1(x + h) - chi_d1(x - h)) / (2 * h)).epsilon(1e-6));
  }
}

TEST_CASE("C_chi limits") {
  CHECK(c_chi(0, 0, 0) == doctest::Approx(8.0 / 3).epsilon(1e-15));
  CHECK(c_chi(1, 1.5, 7.0 / 3) == doctest::Approx(4.0 / 3).epsilon(1e-15));
  auto m = chi_moments();
  CHECK(m.C_chi > 4.0 / 3);
  CHECK(m.C_chi < 8.0 / 3);
  CHECK(m.I0 > 0);
  CHECK(m.I0 < 1);
}

}
