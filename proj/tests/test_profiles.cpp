#include <cmath>

#include "bench.hpp"
#include "blowup_lab/errors.hpp"
#include "blowup_lab/profiles.hpp"
#include "doctest.h"

using namespace blab;

namespace {

const SigmaBundle& sigma3() {
  static SigmaBundle s = build_sigma(bench().family(), 1e-3);
  return s;
}

double sup_ratio(const RadialProfile& f, const std::function<double(double)>& w, double lo, double hi) {
  double m = 0;
  for (int i = 0; i < f.size(); ++i)
    if (f.y(i) >= lo && f.y(i) <= hi) m = std::max(m, std::abs(f[i]) / w(f.y(i)));
  return m;
}

}  // namespace

TEST_SUITE("profiles") {

TEST_CASE("T_k are admissible with growing degree") {
  const auto& fam = bench().family();
  REQUIRE(fam.T.size() >= 5);
  for (int k = 1; k <= 4; ++k) {
    auto r = check_admissible(fam.T[k], k, k);
    CHECK_MESSAGE(r.ok, "T" << k << ": " << r.detail);
    CHECK(r.origin_power == 2 * k + 1);
    CHECK(r.odd_parity);
  }
}

TEST_CASE("T_k chain inverts L") {
  const auto& fam = bench().family();
  const auto& c = *fam.ctx;
  for (int k = 0; k < 4; ++k) {
    auto r = apply_L(c, fam.T[k + 1]) + fam.T[k];
    CHECK(max_abs_on(r, 0, 5e3) <= 1e-6 * max_abs_on(fam.T[k], 0, 5e3));
  }
}

TEST_CASE("truncation and b1 range") {
  auto ctx = bench().context();
  CHECK_THROWS_AS(build_family(ctx, 4), Error);
  CHECK_THROWS_AS(build_family(ctx, 0), Error);
  CHECK_THROWS_AS(build_sigma(bench().family(), 2e-2), Error);
  CHECK_THROWS_AS(build_sigma(bench().family(), 0.0), Error);
}

TEST_CASE("Sigma equals C_b1 T1 inside B0") {
  const auto& fam = bench().family();
  const auto& s = sigma3();
  double dev = max_abs_on(s.SigmaBar, 0, s.k.B0);
  double ref = s.k.C_b1 * max_abs_on(fam.T[1], 0, s.k.B0);
  CHECK(dev <= 1e-8 * ref);
  CHECK(s.k.B0 < s.k.B);
}

TEST_CASE("y Sigma approaches C1 beyond B") {
  const auto& fam = bench().family();
  const auto& s = sigma3();
  for (int i = 0; i < s.Sigma.size(); ++i) {
    double y = s.Sigma.y(i);
    if (y < 4 * s.k.B || y > 16 * s.k.B) continue;
    CHECK(std::abs(y * s.Sigma[i]) == doctest::Approx(fam.C1).epsilon(5e-2));
  }
}

TEST_CASE("Sigma constants are O(sqrt b1)") {
  const auto& fam = bench().family();
  for (double b1 : {1e-2, 1e-3, 1e-4}) {
    auto k = sigma_constants(fam, b1);
    double r = k.C_b1 / std::sqrt(b1);
    CHECK(r > 0.5 * fam.C1 / fam.a0);
    CHECK(r < 2.0 * fam.C1 / fam.a0);
  }
}

TEST_CASE("theta_1 obeys its two-zone bounds") {
  const auto& fam = bench().family();
  double inner_c[2], outer_c[2];
  int j = 0;
  for (double b1 : {1e-3, 1e-4}) {
    auto s = build_sigma(fam, b1);
    auto th = build_theta(fam, 1, s);
    double B = s.k.B, rb = std::sqrt(b1);
    inner_c[j] = sup_ratio(th, [&](double y) { return rb + 1 / y; }, 1, 2 * B);
    outer_c[j] = sup_ratio(th, [&](double y) { return std::log(y) / (y * y) + 1 / (rb * y * y * y); }, 2 * B,
                           th.grid->ymax() / 2);
    ++j;
  }
  for (int i = 0; i < 2; ++i) {
    CHECK(inner_c[i] <= 10.0);
    CHECK(outer_c[i] <= 10.0);
  }
}

TEST_CASE("theta recurrence") {
  const auto& fam = bench().family();
  const auto& c = *fam.ctx;
  const auto& s = sigma3();
  auto t1 = build_theta(fam, 1, s), t2 = build_theta(fam, 2, s);
  auto LZ = shift_power(lambda_op(c.Z), -2);
  auto r = apply_L(c, t2) + t1 + LZ * fam.T[2];
  CHECK(max_abs_on(r, 1e-2, 1e3) <= 1e-4 * max_abs_on(t1, 1e-2, 1e3));
}

TEST_CASE("S_k does not depend on b_m for m >= k") {
  const auto& fam = bench().family();
  const auto& s = sigma3();
  double b1 = 1e-3;
  std::vector<double> b{b1, 0.3 * std::pow(b1, 2.5)};
  auto S = build_S(fam, s, b);
  auto Sp = build_S(fam, s, {b1, 2 * b[1]});
  CHECK(max_abs_on(Sp.S[2] - S.S[2], 0, 1e4) <= 1e-12 * max_abs_on(S.S[2], 0, 1e4));
  CHECK(max_abs_on(S.dS[2][2], 0, 1e4) <= 1e-10 * max_abs_on(S.S[2], 0, 1e4) / b[1]);
}

TEST_CASE("S_2 tail stays bounded and starts at y^5") {
  const auto& fam = bench().family();
  const auto& s = sigma3();
  auto S = build_S(fam, s, {1e-3, 0.0});
  // flat tail, against the linear growth of L^-1 applied to the uncorrected 1/y source
  CHECK(loglog_slope(S.S[2], 2e3, 4e3) <= 0.1);
  auto r = check_admissible(S.S[2], 2, 2);
  CHECK(r.origin_power == 5);
}

TEST_CASE("Q_b assembly") {
  const auto& fam = bench().family();
  const auto& s = sigma3();
  const auto& Q = fam.ctx->Q.Q;
  auto S0 = build_S(fam, s, {0.0, 0.0});
  CHECK(assemble_Qb(fam, S0).v == Q.v);
  double b1 = 1e-3;
  auto S = build_S(fam, s, {b1, 0.0});
  auto qb = assemble_Qb(fam, S);
  int i = Q.grid->index_at_least(1e-2);
  CHECK((qb[i] - Q[i]) / (b1 * fam.T[1][i]) == doctest::Approx(1.0).epsilon(1e-3));
  double B1 = B1_of(s.k, 3.0 / 8);
  auto ql = assemble_Qb_localized(fam, S, B1);
  for (int j = 0; j < Q.size() && Q.y(j) <= B1; ++j) CHECK(ql[j] == qb[j]);
  CHECK_THROWS_AS(assemble_Qb_localized(fam, S, 1e5), Error);
}

TEST_CASE("Psi vanishes at b = 0") {
  const auto& fam = bench().family();
  auto S0 = build_S(fam, sigma3(), {0.0, 0.0});
  auto P = residual_Psi(fam, sigma3(), S0, {0.0, 0.0});
  CHECK(max_abs_on(P.Psi, 0, 1e4) <= 1e-8);
  CHECK(max_abs_on(P.Mod, 0, 1e4) == 0.0);
}

TEST_CASE("off-law b_dot shows up in Mod") {
  const auto& fam = bench().family();
  const auto& s = sigma3();
  std::vector<double> b{1e-3, 0.0};
  auto S = build_S(fam, s, b);
  auto law = modulation_bdot(b, s.k.C_b1);
  auto P0 = residual_Psi(fam, s, S);
  auto P1 = residual_Psi(fam, s, S, {law[0] + 1e-6, law[1]});
  CHECK(max_abs_on(P0.Mod, 0, 1e4) == 0.0);
  CHECK(max_abs_on(P1.Mod, 0, 1e4) > 0.0);
  CHECK(max_abs_on(P1.Psi - P0.Psi, 0, 1e3) <= 1e-10);
}

TEST_CASE("modulation law") {
  auto r = modulation_bdot({0.01, 2e-5}, 0.1);
  CHECK(r[0] == doctest::Approx(-0.1 * 0.01 * 0.01 + 2e-5).epsilon(1e-14));
  CHECK(r[1] == doctest::Approx(-(2 + 0.1) * 0.01 * 2e-5).epsilon(1e-14));
}

TEST_CASE("weighted norm of a constant") {
  auto g = make_log_grid(1e-4, 10.0, 2048, 1.0);
  auto one = sample(g, [](double) { return 1.0; }, Series::constant(1.0, 8));
  CHECK(weighted_norm2(one, 0, 2.0) == doctest::Approx(std::pow(2.0, 7) / 14).epsilon(1e-6));
}

TEST_CASE("Phi_M is orthogonal to T_k") {
  const auto& fam = bench().family();
  auto basis = make_phi_basis(fam, 20.0);
  const auto& phi = basis.phi.Phi;
  for (int k = 1; k <= fam.L; ++k)
    CHECK(std::abs(inner(phi, fam.T[k])) <= 1e-8 * norm(phi) * norm(fam.T[k], 40.0));
  CHECK(basis.phi.c[0] == 1.0);
  CHECK(basis.LQ_Phi == doctest::Approx(basis.phi.chiLQ_LQ).epsilon(1e-8));
}

}
