#include <cmath>

#include "blowup_lab/errors.hpp"
#include "blowup_lab/grid.hpp"
#include "doctest.h"

using namespace blab;

TEST_SUITE("grid_quadrature") {

TEST_CASE("log grid has uniform spacing in log y") {
  auto g = make_log_grid(1e-3, 1e3, 2048, 1.0);
  REQUIRE(g->size() == 2048);
  CHECK(g->ymin() == doctest::Approx(1e-3));
  CHECK(g->ymax() == doctest::Approx(1e3));
  double h = std::log(g->y[1] / g->y[0]);
  for (int i = 1; i + 1 < g->size(); ++i) CHECK(std::log(g->y[i + 1] / g->y[i]) == doctest::Approx(h).epsilon(1e-10));
}

TEST_CASE("too few nodes is a parameter error") {
  try {
    make_log_grid(1e-3, 1e3, 8, 1.0);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::parameter);
  }
}

TEST_CASE("quadrature weights integrate y^6 over [0, 1]") {
  auto g = make_log_grid(1e-4, 1.0, 2048, 1.0);
  double s = 0;
  for (double w : g->quad_weights) s += w;
  CHECK(s == doctest::Approx(1.0 / 7).epsilon(1e-8));
}

TEST_CASE("stencil differentiates y^2 exactly") {
  auto g = make_log_grid(1e-3, 1e3, 2048, 1.0);
  auto f = sample(g, [](double y) { return y * y; });
  auto df = differentiate(f, 1);
  for (int i = 0; i < g->size(); ++i) CHECK(df[i] == doctest::Approx(2 * g->y[i]).epsilon(1e-9));
}

TEST_CASE("sin differentiates to cos at fourth order") {
  double err[2];
  int n[2] = {2048, 4096};
  for (int k = 0; k < 2; ++k) {
    auto g = make_log_grid(1e-3, 1e2, n[k], 1.0);
    auto df = differentiate(sample(g, [](double y) { return std::sin(y); }), 1);
    err[k] = 0;
    for (int i = 2; i + 2 < g->size() && g->y[i] <= 10; ++i)
      err[k] = std::max(err[k], std::abs(df[i] - std::cos(g->y[i])));
  }
  CHECK(err[1] < 1e-7);
  CHECK(std::log2(err[0] / err[1]) > 3.5);
}

TEST_CASE("constant differentiates to zero") {
  auto g = make_log_grid(1e-3, 1e3, 1024, 1.0);
  auto f = sample(g, [](double) { return 3.5; });
  auto d1 = differentiate(f, 1), d2 = differentiate(f, 2);
  for (int i = 0; i < g->size(); ++i) {
    double y = g->y[i];
    CHECK(std::abs(d1[i]) * y < 1e-9);
    CHECK(std::abs(d2[i]) * y * y < 1e-9);
  }
}

TEST_CASE("cumulative integral of 1 against y^6") {
  auto g = make_log_grid(1e-3, 10.0, 1024, 1.0);
  auto F = integrate_cumulative(sample(g, [](double) { return 1.0; }, Series::constant(1.0, 4)), 6);
  for (int i = 0; i < g->size(); i += 37) {
    double y = g->y[i];
    CHECK(std::abs(F[i] - std::pow(y, 7) / 7) <= 1e-6 * std::max(1e-12, std::pow(y, 7) / 7));
  }
}

TEST_CASE("origin series integrates term by term") {
  auto g = make_log_grid(1e-3, 1.0, 512, 1.0);
  auto f = sample(g, [](double y) { return y * y * y; }, Series::monomial(3, 1.0, 4));
  auto F = integrate_cumulative(f, 6);
  REQUIRE(F.origin);
  CHECK(F.origin->leading_power() == 10);
  CHECK(F.origin->coeff(10) == doctest::Approx(0.1));
  CHECK(F[0] == doctest::Approx(std::pow(1e-3, 10) / 10).epsilon(1e-12));
}

TEST_CASE("non-integrable origin is a singularity error") {
  auto g = make_log_grid(1e-3, 1.0, 512, 1.0);
  auto f = sample(g, [](double y) { return std::pow(y, -8); }, Series::monomial(-8, 1.0, 4));
  try {
    integrate_cumulative(f, 6);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::singularity);
  }
}

TEST_CASE("exact power law tail fit") {
  auto g = make_log_grid(1e-3, 1e4, 4096, 1.0);
  auto t = fit_tail(sample(g, [](double y) { return 5 / (y * y * y); }), 1e2, 1e3);
  CHECK_FALSE(t.sign_change);
  CHECK(t.coefficient == doctest::Approx(5.0).epsilon(1e-10));
  CHECK(t.exponent == doctest::Approx(-3.0).epsilon(1e-10));
}

TEST_CASE("two-term tail keeps the leading exponent") {
  const double a0 = 2.69308, a1 = 2.83447;
  auto g = make_log_grid(1e-3, 1e4, 4096, 1.0);
  auto f = sample(g, [&](double y) { return 2 * a0 / (y * y) - 3 * a1 / (y * y * y); });
  auto t = fit_tail(f, 1e2, 1e3);
  CHECK(std::abs(t.exponent + 2) <= 1e-2);
  auto c = fit_powers(f, 1e2, 1e3, {-2.0, -3.0});
  CHECK(c[0] == doctest::Approx(2 * a0).epsilon(1e-10));
  CHECK(c[1] == doctest::Approx(-3 * a1).epsilon(1e-10));
}

TEST_CASE("alternating sign sets the fit flag") {
  auto g = make_log_grid(1e-3, 1e4, 4096, 1.0);
  auto t = fit_tail(sample(g, [](double y) { return std::sin(y) / (y * y); }), 1e2, 1e3);
  CHECK(t.sign_change);
  CHECK(std::isnan(t.exponent));
}

TEST_CASE("tail window with too few nodes") {
  auto g = make_log_grid(1e-3, 1e4, 64, 1.0);
  CHECK_THROWS_AS(fit_tail(sample(g, [](double y) { return 1 / y; }), 1e2, 1.2e2), Error);
}

TEST_CASE("profile cache round trip and checksum") {
  CacheHeader h{"log 1e-3 1e3 16", 7, "unit", "rtol 1e-10", "none"};
  std::vector<double> data{1.0, -2.5, 3.25, 1e-300};
  std::string path = "grid_cache_test.txt";
  write_profile_cache(path, h, data);
  CacheHeader h2;
  std::vector<double> back;
  REQUIRE(read_profile_cache(path, h2, back));
  CHECK(back == data);
  CHECK(h2.d == 7);
  CHECK(checksum_hex(data) != checksum_hex(std::vector<double>{1.0, -2.5, 3.25, 0.0}));
  std::remove(path.c_str());
  CHECK_FALSE(read_profile_cache(path, h2, back));
}

}
