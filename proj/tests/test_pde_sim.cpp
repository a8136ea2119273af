#include <cmath>
#include <numbers>

#include "bench.hpp"
#include "blowup_lab/errors.hpp"
#include "blowup_lab/pde_sim.hpp"
#include "doctest.h"

using namespace blab;

namespace {

double drift_until_one(const std::function<double(double)>& u0, int d, int n) {
  SimParams p;
  p.d = d;
  p.n = n;
  auto s = make_sim_state(u0, p);
  auto s0 = s;
  while (s.t < 1.0) s = step(s, std::min(stable_dtau(s, p), 1.0 - s.t + 1e-15));
  double m = 0;
  for (size_t i = 0; i < s.u.size(); ++i) m = std::max(m, std::abs(s.u[i] - s0.u[i]));
  return m;
}

}  // namespace

TEST_SUITE("pde_sim") {

TEST_CASE("sinh grid") {
  SimParams p;
  auto y = make_sim_grid(p);
  REQUIRE(static_cast<int>(y.size()) == p.n + 1);
  CHECK(y.front() == 0.0);
  CHECK(y.back() == p.y_max);
  for (size_t i = 1; i < y.size(); ++i) CHECK(y[i] > y[i - 1]);
  p.n = 8;
  CHECK_THROWS_AS(make_sim_grid(p), Error);
}

TEST_CASE("ground states are stationary") {
  const auto& Q = bench().Q7();
  CHECK(drift_until_one([&](double r) { return Q.Q.at(r); }, 7, 8000) <= 1e-6);
  CHECK(drift_until_one([](double r) { return 2 * std::atan(r); }, 2, 8000) <= 1e-6);
}

TEST_CASE("zero stays zero") {
  SimParams p;
  auto s = make_sim_state([](double) { return 0.0; }, p);
  for (int i = 0; i < 50; ++i) s = step(s, 1e-2);
  for (double v : s.u) CHECK(v == 0.0);
}

TEST_CASE("rescaling keeps the profile") {
  SimParams p;
  auto s = make_sim_state(tanh_data(1.5), p);
  auto f = sim_interpolant(s);
  double lr = reference_lambda(s);
  auto r = rescale(s);
  CHECK(r.scale == doctest::Approx(lr));
  for (size_t i = 1; i < r.y.size(); i += 50) CHECK(r.u[i] == doctest::Approx(f(lr * r.y[i])));
}

TEST_CASE("large data blows up in d = 7") {
  SimParams p;
  auto run = run_to_blowup(tanh_data(1.5), p);
  REQUIRE(run.blew_up);
  CHECK(run.fit.lambda_series.back().lambda <= p.stop_lambda);
  CHECK(run.fit.T > run.fit.lambda_series.back().t);
  CHECK(run.fit.type_class == TypeClass::TypeII);
  CHECK_FALSE(run.events.empty());
}

TEST_CASE("large data in d = 5 is self-similar") {
  SimParams p;
  p.d = 5;
  auto run = run_to_blowup(tanh_data(1.5), p);
  REQUIRE(run.blew_up);
  CHECK(run.fit.type_class == TypeClass::TypeI);
  CHECK(std::abs(run.fit.rho_slope) <= 5e-2);
}

TEST_CASE("small data decays") {
  auto run = run_to_blowup(tanh_data(0.5), SimParams{});
  CHECK_FALSE(run.blew_up);
  CHECK(run.decayed);
}

TEST_CASE("classification of the exact log-corrected rate") {
  const double T = 0.5;
  std::vector<LambdaSample> s;
  double prev = 0;
  for (int i = 0; i <= 2000; ++i) {
    double rem = T * std::pow(10.0, -12.0 * i / 2000);
    double t = T - rem;
    s.push_back({t, std::sqrt(rem) / std::abs(std::log(rem)), i ? t - prev : 0.0});
    prev = t;
  }
  double rem_end = T - s.back().t;
  auto f = classify(s, rem_end);
  CHECK(f.type_class == TypeClass::TypeII);
  CHECK(f.rate_slope == doctest::Approx(-1.0).epsilon(5e-2));
  CHECK(f.rho_decreasing);
  CHECK(f.decades >= 2.0);
}

TEST_CASE("classification of an exact self-similar rate") {
  const double T = 0.5;
  std::vector<LambdaSample> s;
  for (int i = 0; i <= 2000; ++i) {
    double rem = T * std::pow(10.0, -12.0 * i / 2000);
    s.push_back({T - rem, 0.7 * std::sqrt(rem), 0.0});
  }
  auto f = classify(s, T - s.back().t);
  CHECK(f.type_class == TypeClass::TypeI);
  CHECK(std::abs(f.rho_slope) <= 1e-6);
}

TEST_CASE("decomposition of an exact ansatz member") {
  const auto& fam = bench().family();
  auto basis = make_phi_basis(fam, 20.0);
  const auto& Q = fam.ctx->Q.Q;
  const double ls = 0.37;
  auto d = decompose_modulation([&](double r) { return Q.at(r / ls); }, fam, basis, 0.3);
  CHECK(std::abs(d.lambda / ls - 1) <= 1e-8);
  for (double b : d.b) CHECK(std::abs(b) <= 1e-8);
  std::vector<double> bt{1e-3, -1e-6};
  auto ans = ansatz_profile(fam, bt);
  auto d2 = decompose_modulation([&](double r) { return ans.at(r / ls); }, fam, basis, 0.3);
  CHECK(std::abs(d2.lambda / ls - 1) <= 1e-6);
  CHECK(std::abs(d2.b[0] - bt[0]) <= 1e-6);
  CHECK(std::abs(d2.b[1] - bt[1]) <= 1e-6);
}

TEST_CASE("energy scales like lambda^(d - 2)") {
  const int d = 7;
  auto u = [](double r) { return 2.0 * r * r * std::exp(-r * r); };
  std::vector<double> r1, u1, r2, u2;
  const int n = 40000;
  for (int i = 0; i <= n; ++i) {
    double r = 20.0 * i / n;
    r1.push_back(r);
    u1.push_back(u(r));
    r2.push_back(2 * r);
    u2.push_back(u(r));
  }
  auto e1 = energy(r1, u1, d), e2 = energy(r2, u2, d);
  CHECK_FALSE(e1.divergent);
  CHECK(e2.value / e1.value == doctest::Approx(std::pow(2.0, d - 2)).epsilon(1e-4));
}

TEST_CASE("energy of zero and of Q") {
  std::vector<double> r, z;
  for (int i = 0; i <= 1000; ++i) {
    r.push_back(0.01 * i);
    z.push_back(0.0);
  }
  auto e0 = energy(r, z, 7);
  CHECK(e0.value == 0.0);
  CHECK_FALSE(e0.divergent);
  const auto& Q = bench().Q7().Q;
  std::vector<double> rq{0.0}, uq{0.0};
  for (int i = 0; i < Q.size(); ++i) {
    rq.push_back(Q.y(i));
    uq.push_back(Q[i]);
  }
  CHECK(energy(rq, uq, 7).divergent);
}

TEST_CASE("monitor energies vanish on zero and on the kernel") {
  auto lc = leibniz_context();
  auto zero = 0.0 * lc.LQ;
  for (double e : monitor_energies(zero, lc, {1, 2})) CHECK(e == 0.0);
  for (double e : monitor_energies(1e-3 * lc.LQ, lc, {1, 2}, 10.0)) CHECK(e <= 1e-12);
  auto e0 = monitor_energies(lc.LQ, lc, {0}, 10.0);
  CHECK(e0[0] == doctest::Approx(norm(lc.LQ, 10.0) * norm(lc.LQ, 10.0)));
}

}
