#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "blowup_lab/errors.hpp"
#include "blowup_lab/modulation.hpp"
#include "doctest.h"

using namespace blab;

namespace {

const double kC = 1.608586;

double lam2(double s) { return std::exp(-6 * std::cbrt(s)); }

// lambda = exp(-3 s^(1/3)) sampled on [s0, s_end], t from per-segment quadrature
std::vector<ModulationState> synthetic(double s0, double s_end, int per_decade) {
  using boost::math::quadrature::gauss_kronrod;
  std::vector<ModulationState> tr;
  int n = static_cast<int>(per_decade * std::log10(s_end / s0));
  double t = 0, prev = s0;
  for (int i = 0; i <= n; ++i) {
    double s = s0 * std::pow(s_end / s0, static_cast<double>(i) / n);
    if (i > 0) t += gauss_kronrod<double, 31>::integrate(lam2, prev, s, 10, 1e-14);
    ModulationState st;
    st.b = {0.0};
    st.s = s;
    st.t = t;
    st.log_lambda = -3 * std::cbrt(s);
    tr.push_back(st);
    prev = s;
  }
  return tr;
}

}  // namespace

TEST_SUITE("modulation") {

TEST_CASE("L = 1 right-hand side") {
  ModulationState st;
  st.b = {1e-3};
  auto r = modulation_rhs(st, c_model(kC));
  CHECK(r.db[0] == doctest::Approx(-kC * std::pow(1e-3, 2.5)).epsilon(1e-14));
  CHECK(r.dlog_lambda == doctest::Approx(-1e-3).epsilon(1e-14));
}

TEST_CASE("b = 0 is a fixed point") {
  ModulationState st;
  st.b = {0.0, 0.0};
  auto r = modulation_rhs(st, c_model(kC));
  CHECK(r.db[0] == 0.0);
  CHECK(r.db[1] == 0.0);
  CHECK(r.dlog_lambda == 0.0);
  CHECK(r.dlambda == 0.0);
}

TEST_CASE("dt/ds = lambda^2") {
  ModulationState st;
  st.b = {1e-3};
  st.log_lambda = std::log(2.0);
  CHECK(modulation_rhs(st, c_model(kC)).dt == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("negative b1 is a domain error") {
  ModulationState st;
  st.b = {-1e-3};
  try {
    modulation_rhs(st, c_model(kC));
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::domain);
  }
}

TEST_CASE("L = 1 trajectory follows the separable closed form") {
  auto st = default_initial_state(1);
  auto tr = integrate_modulation(st, 1e6, c_model(kC));
  double sstar = st.s - std::pow(st.b[0], -1.5) / (1.5 * kC);
  double worst = 0;
  for (auto& x : tr) worst = std::max(worst, std::abs(x.b[0] / std::pow(1.5 * kC * (x.s - sstar), -2.0 / 3) - 1));
  CHECK(worst <= 1e-8);
}

TEST_CASE("b1 s^(2/3) settles and lambda, b1 decrease") {
  auto tr = integrate_modulation(default_initial_state(2), 1e6, c_model(kC));
  double lo = 0, hi = 0;
  for (size_t i = 0; i < tr.size(); ++i) {
    if (tr[i].s >= 1e4 && lo == 0) lo = tr[i].b[0] * std::pow(tr[i].s, 2.0 / 3);
    hi = tr[i].b[0] * std::pow(tr[i].s, 2.0 / 3);
    if (i == 0) continue;
    CHECK(tr[i].log_lambda < tr[i - 1].log_lambda);
    // b1 decreases once b2 << c b1^(5/2)
    if (tr[i - 1].b[1] < 0.1 * kC * std::pow(tr[i - 1].b[0], 2.5)) CHECK(tr[i].b[0] < tr[i - 1].b[0]);
  }
  CHECK(std::abs(hi / lo - 1) <= 1e-2);
}

TEST_CASE("b2 is damped by the b1 b2 term") {
  // (b2)_s = -(2 + C) b1 b2 with b1 ~ s^(-2/3): log b2 is linear in s^(1/3)
  auto tr = integrate_modulation(default_initial_state(2), 1e6, c_model(kC));
  std::vector<double> x, y;
  for (auto& st : tr)
    if (st.s >= 1e4 && st.b[1] > 0) {
      x.push_back(std::cbrt(st.s));
      y.push_back(std::log(st.b[1]));
    }
  REQUIRE(x.size() > 10);
  double k1 = (y[x.size() / 2] - y.front()) / (x[x.size() / 2] - x.front());
  double k2 = (y.back() - y[x.size() / 2]) / (x.back() - x[x.size() / 2]);
  CHECK(k1 < 0);
  CHECK(k2 == doctest::Approx(k1).epsilon(0.1));
  CHECK(bootstrap_ratio(tr, 3.0 / 8) <= 10.0);
}

TEST_CASE("log lambda is linear in s^(1/3)") {
  auto tr = integrate_modulation(default_initial_state(2), 1e6, c_model(kC));
  auto f = fit_log_lambda(tr, 1e5, 1e6);
  CHECK(f.kappa > 0);
  CHECK(f.rel_residual <= 1e-2);
  auto free = fit_log_lambda(tr, 1e5, 1e6, true);
  CHECK(free.exponent == doctest::Approx(1.0 / 3).epsilon(5e-2));
}

TEST_CASE("blowup time of the synthetic lambda") {
  using boost::math::quadrature::exp_sinh;
  exp_sinh<double> q;
  for (double s_end : {1e3, 1e4}) {
    auto tr = synthetic(100.0, s_end, 200);
    auto bt = blowup_time(tr);
    double exact = q.integrate(lam2, 100.0, std::numeric_limits<double>::infinity());
    double tail = q.integrate(lam2, s_end, std::numeric_limits<double>::infinity());
    CHECK(std::abs(bt.T / exact - 1) <= 1e-6);
    CHECK(std::abs(std::exp(bt.log_remaining.back()) / tail - 1) <= 1e-6);
    CHECK(bt.fit.kappa == doctest::Approx(3.0).epsilon(1e-8));
  }
}

TEST_CASE("doubling s_end moves T by at most the tail estimate") {
  auto st = default_initial_state(2);
  auto tr1 = integrate_modulation(st, 1e5, c_model(kC));
  auto tr2 = integrate_modulation(st, 2e5, c_model(kC));
  auto b1 = blowup_time(tr1), b2 = blowup_time(tr2);
  CHECK(std::abs(b1.T - b2.T) <= b1.tail_error);
}

TEST_CASE("non-decaying lambda is an estimation error") {
  std::vector<ModulationState> tr(20);
  for (int i = 0; i < 20; ++i) {
    tr[i].b = {0.0};
    tr[i].s = 100.0 * (i + 1);
    tr[i].t = tr[i].s;
  }
  CHECK_THROWS_AS(blowup_time(tr), Error);
}

TEST_CASE("rate slope of the exact log-corrected law") {
  std::vector<double> lr, ll;
  for (int i = 0; i <= 200; ++i) {
    double l = std::log(1e-4) + i * (std::log(1e-14) - std::log(1e-4)) / 200;
    lr.push_back(l);
    ll.push_back(0.5 * l - std::log(std::abs(l)));
  }
  CHECK(rate_slope(lr, ll) == doctest::Approx(-1.0).epsilon(1e-3));
}

TEST_CASE("integrated system has the log-corrected rate") {
  auto tr = integrate_modulation(default_initial_state(2), 1e9, c_model(kC));
  auto bt = blowup_time(tr);
  auto rr = rate_diagnostics(tr, bt);
  CHECK(std::abs(rr.slope + 1) <= 5e-2);
  CHECK(rr.R_variation <= 0.1);
}

}
