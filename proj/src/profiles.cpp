#include "blowup_lab/profiles.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <functional>

#include "blowup_lab/cutoff.hpp"
#include "blowup_lab/errors.hpp"

namespace blab {

namespace {

using boost::math::quadrature::gauss_kronrod;

RadialProfile zeros_like(const GridPtr& g) {
  return RadialProfile(g, std::vector<double>(g->size(), 0.0), Series(0, std::vector<double>(64, 0.0)));
}

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

// f^(j)(Q) for f(x) = sin 2x, with origin series
RadialProfile f_deriv_Q(const LinearizedContext& c, int j) {
  const auto& Q = c.Q.Q;
  double s = std::pow(2.0, j) * (((j / 2) % 2 == 0) ? 1.0 : -1.0);
  bool even = j % 2 == 0;
  auto r = map_values(Q, [&](double, double q) { return s * (even ? std::sin(2 * q) : std::cos(2 * q)); });
  Series arg = 2.0 * *Q.origin;
  r.origin = s * (even ? sin_of(arg) : cos_of(arg));
  return r;
}

struct Factor {
  int weight;
  const RadialProfile* p;
  double scale;
};

std::vector<Factor> theta_factors(const ProfileFamily& fam, const std::vector<double>& b,
                                  const std::vector<RadialProfile>& S) {
  std::vector<Factor> out;
  for (int m = 1; m <= fam.L; ++m) out.push_back({m, &fam.T[m], b[m - 1]});
  for (int m = 2; m < static_cast<int>(S.size()); ++m) out.push_back({m, &S[m], 1.0});
  return out;
}

// sum over multi-indices with |J|_1 in [j_lo, j_hi] and |J|_2 in [w_lo, w_hi] of
// f^(|J|_1)(Q) prod factor^c / c!
RadialProfile taylor_terms(const ProfileFamily& fam, const std::vector<Factor>& fs, int j_lo, int j_hi, int w_lo,
                           int w_hi) {
  const auto& c = *fam.ctx;
  RadialProfile acc = zeros_like(c.grid);
  std::vector<int> cnt(fs.size(), 0);
  std::vector<RadialProfile> fq(j_hi + 1);
  for (int j = j_lo; j <= j_hi; ++j) fq[j] = f_deriv_Q(c, j);
  std::function<void(size_t, int, int)> rec = [&](size_t idx, int count, int weight) {
    if (idx == fs.size()) {
      if (count < j_lo || count > j_hi || weight < w_lo || weight > w_hi) return;
      RadialProfile term = fq[count];
      double coef = 1.0;
      for (size_t q = 0; q < fs.size(); ++q) {
        for (int e = 0; e < cnt[q]; ++e) term = term * *fs[q].p;
        coef *= std::pow(fs[q].scale, cnt[q]) / factorial(cnt[q]);
      }
      if (coef != 0.0) acc = acc + coef * term;
      return;
    }
    for (int e = 0; count + e <= j_hi && weight + e * fs[idx].weight <= w_hi; ++e) {
      cnt[idx] = e;
      rec(idx + 1, count + e, weight + e * fs[idx].weight);
    }
    cnt[idx] = 0;
  };
  rec(0, 0, 0);
  return acc;
}

SigmaConstants constants_at(const ProfileFamily& fam, double b1) {
  const auto& c = *fam.ctx;
  SigmaConstants k;
  k.b1 = b1;
  k.B0 = fam.chi.C_chi / std::sqrt(b1);
  auto chiB0 = cutoff_profile(c.grid, k.B0);
  k.m_LQ2 = inner(chiB0 * c.LQ, c.LQ);
  k.m_GLQ = inner(chiB0 * c.Gamma, c.LQ);
  const auto& m = fam.chi;
  double a0 = fam.a0;
  k.B = k.m_LQ2 * (1 + m.I0) / (4 * a0 * a0 * k.m_GLQ * (0.5 + m.I1));
  k.C_b1 = fam.C1 * k.m_LQ2 * (1 + m.I0) * (1 + m.I0) / (4 * a0 * a0 * a0 * k.m_GLQ * k.m_GLQ * (0.5 + m.I1));
  if (2 * k.B > c.grid->ymax())
    throw Error(ErrorKind::domain, "grid too small for 2B = " + std::to_string(2 * k.B));
  return k;
}

SigmaBundle sigma_at(const ProfileFamily& fam, double b1) {
  const auto& c = *fam.ctx;
  SigmaBundle s;
  s.k = constants_at(fam, b1);
  auto chiB0 = cutoff_profile(c.grid, s.k.B0);
  auto chiB = cutoff_profile(c.grid, s.k.B);
  auto one = sample(c.grid, [](double) { return 1.0; }, Series::constant(1.0, 64));
  s.source = -(s.k.C_b1 * (c.LQ * chiB0)) - fam.alpha * ((one - chiB) * c.Gamma);
  s.Sigma = invert_L(c, s.source).w;
  s.SigmaBar = s.Sigma - s.k.C_b1 * fam.T[1];
  return s;
}

double fd_step(const std::vector<double>& b, int j) {
  return 1e-3 * std::max(std::abs(b[j - 1]), std::pow(b[0], j + 0.5));
}

std::vector<double> shifted(std::vector<double> b, int j, double h) {
  b[j - 1] += h;
  return b;
}

// S_0 .. S_kmax at b, with F_k and theta on request
std::vector<RadialProfile> s_chain(const ProfileFamily& fam, const SigmaBundle& sig, const std::vector<double>& b,
                                   int kmax, std::vector<RadialProfile>* F_out,
                                   std::vector<RadialProfile>* theta_out);

RadialProfile dS_db(const ProfileFamily& fam, const SigmaBundle& sig, const std::vector<double>& b, int m, int j) {
  double h = fd_step(b, j);
  auto bp = shifted(b, j, h), bm = shifted(b, j, -h);
  std::vector<RadialProfile> sp, sm;
  if (j == 1) {
    auto sgp = sigma_at(fam, bp[0]), sgm = sigma_at(fam, bm[0]);
    sp = s_chain(fam, sgp, bp, m, nullptr, nullptr);
    sm = s_chain(fam, sgm, bm, m, nullptr, nullptr);
  } else {
    sp = s_chain(fam, sig, bp, m, nullptr, nullptr);
    sm = s_chain(fam, sig, bm, m, nullptr, nullptr);
  }
  return (1.0 / (2 * h)) * (sp[m] - sm[m]);
}

std::vector<RadialProfile> s_chain(const ProfileFamily& fam, const SigmaBundle& sig, const std::vector<double>& b,
                                   int kmax, std::vector<RadialProfile>* F_out,
                                   std::vector<RadialProfile>* theta_out) {
  const auto& c = *fam.ctx;
  int L = fam.L;
  double b1 = b[0], C = sig.k.C_b1;
  std::vector<RadialProfile> theta(L + 1);
  for (int k = 1; k <= L; ++k) theta[k] = build_theta(fam, k, sig);
  std::vector<RadialProfile> S{zeros_like(c.grid), zeros_like(c.grid)};
  if (F_out) F_out->assign(2, zeros_like(c.grid));
  for (int k = 2; k <= kmax; ++k) {
    int m = k - 1;
    RadialProfile E = zeros_like(c.grid);
    if (m <= L) E = E + (b1 * b[m - 1]) * theta[m];
    if (m >= 2) {
      E = E + b1 * lambda_op(S[m]);
      for (int j = 1; j <= std::min(k - 2, L); ++j) {
        double bj1 = j < L ? b[j] : 0.0;
        double g = (2.0 * j - 2.0 + C) * b1 * b[j - 1] - bj1;
        if (g != 0.0) E = E - g * dS_db(fam, sig, b, m, j);
      }
    }
    auto F = E + nonlinear_part(fam, b, S, k);
    S.push_back(-invert_L(c, F).w);
    if (F_out) F_out->push_back(F);
  }
  if (theta_out) *theta_out = theta;
  return S;
}

double f_j(int j, double q) {
  double s = std::pow(2.0, j) * (((j / 2) % 2 == 0) ? 1.0 : -1.0);
  return s * (j % 2 == 0 ? std::sin(2 * q) : std::cos(2 * q));
}

// sum_{j >= n} f^(j)(q) t^j / j!
double taylor_tail(double q, double t, int n) {
  if (std::abs(t) < 0.25) {
    double s = 0.0, p = std::pow(t, n) / factorial(n);
    for (int j = n; j < n + 40; ++j) {
      s += f_j(j, q) * p;
      p *= t / (j + 1);
      if (std::abs(p) * std::pow(2.0, j + 1) < 1e-30 * std::abs(s)) break;
    }
    return s;
  }
  double s = std::sin(2 * q + 2 * t), p = 1.0;
  for (int j = 0; j < n; ++j) {
    s -= f_j(j, q) * p;
    p *= t / (j + 1);
  }
  return s;
}

}  // namespace

double c_chi(double I0, double I1, double I2) {
  return (1 + I0) * (1 + I0) * (1.0 / 3 + I2) / std::pow(0.5 + I1, 3);
}

ChiMoments chi_moments() {
  ChiMoments m;
  m.I0 = gauss_kronrod<double, 61>::integrate([](double x) { return chi(x); }, 1.0, 2.0, 15, 1e-14);
  m.I1 = gauss_kronrod<double, 61>::integrate([](double x) { return x * chi(x); }, 1.0, 2.0, 15, 1e-14);
  m.I2 = gauss_kronrod<double, 61>::integrate([](double x) { return x * x * chi(x); }, 1.0, 2.0, 15, 1e-14);
  m.C_chi = c_chi(m.I0, m.I1, m.I2);
  return m;
}

ProfileFamily build_family(std::shared_ptr<const LinearizedContext> ctx, int L, int t_max) {
  if (L < 1 || L > 3) throw Error(ErrorKind::unsupported, "profile truncation L must be 1, 2 or 3");
  ProfileFamily f;
  f.ctx = ctx;
  f.L = L;
  f.a0 = ctx->a0;
  f.a1 = ctx->a1;
  f.C0 = f.a0 / 3.0;
  f.C1 = 1.5 * f.a1;
  f.alpha = 4.0 * f.a0 * f.C1;
  f.chi = chi_moments();
  f.T.push_back(ctx->LQ);
  for (int k = 1; k <= std::max(L, t_max); ++k) f.T.push_back(-invert_L(*ctx, f.T.back()).w);
  return f;
}

SigmaConstants sigma_constants(const ProfileFamily& fam, double b1) {
  if (!(b1 > 0.0 && b1 <= 1e-2)) throw Error(ErrorKind::parameter, "b1 must lie in (0, 1e-2]");
  return constants_at(fam, b1);
}

SigmaBundle build_sigma(const ProfileFamily& fam, double b1) {
  if (!(b1 > 0.0 && b1 <= 1e-2)) throw Error(ErrorKind::parameter, "b1 must lie in (0, 1e-2]");
  return sigma_at(fam, b1);
}

RadialProfile build_theta(const ProfileFamily& fam, int k, const SigmaBundle& sigma) {
  if (k < 1 || k >= static_cast<int>(fam.T.size())) throw Error(ErrorKind::parameter, "theta index out of range");
  const auto& c = *fam.ctx;
  auto r = lambda_op(fam.T[k]) - (2.0 * k - 2.0) * fam.T[k];
  double sgn = (k % 2 == 1) ? 1.0 : -1.0;
  return r - sgn * invert_L_power(c, sigma.Sigma, k - 1);
}

RadialProfile nonlinear_part(const ProfileFamily& fam, const std::vector<double>& b,
                             const std::vector<RadialProfile>& S, int i) {
  std::vector<RadialProfile> Sk(S.begin(), S.begin() + std::min<size_t>(S.size(), i));
  return 3.0 * shift_power(taylor_terms(fam, theta_factors(fam, b, Sk), 2, i, i, i), -2);
}

SProfiles build_S(const ProfileFamily& fam, const SigmaBundle& sigma, const std::vector<double>& b) {
  int L = fam.L;
  if (static_cast<int>(b.size()) != L) throw Error(ErrorKind::parameter, "b must have L entries");
  SProfiles out;
  out.b = b;
  if (std::all_of(b.begin(), b.end(), [](double v) { return v == 0.0; })) {
    // S_k has degree k >= 2 in b, so it vanishes with its first derivatives
    auto z = zeros_like(fam.ctx->grid);
    out.S.assign(L + 3, z);
    out.F.assign(L + 3, z);
    out.dS.assign(L + 3, std::vector<RadialProfile>(L + 1, z));
    out.theta.assign(L + 1, z);
    for (int k = 1; k <= L; ++k) out.theta[k] = build_theta(fam, k, sigma);
    return out;
  }
  if (!(b[0] > 0.0)) throw Error(ErrorKind::domain, "b1 must be positive");
  out.S = s_chain(fam, sigma, b, L + 2, &out.F, &out.theta);
  out.dS.assign(L + 3, {});
  for (int k = 0; k <= L + 2; ++k) out.dS[k].assign(L + 1, zeros_like(fam.ctx->grid));
  for (int j = 1; j <= L; ++j) {
    double h = fd_step(b, j);
    auto bp = shifted(b, j, h), bm = shifted(b, j, -h);
    std::vector<RadialProfile> sp, sm;
    if (j == 1) {
      sp = s_chain(fam, sigma_at(fam, bp[0]), bp, L + 2, nullptr, nullptr);
      sm = s_chain(fam, sigma_at(fam, bm[0]), bm, L + 2, nullptr, nullptr);
    } else {
      sp = s_chain(fam, sigma, bp, L + 2, nullptr, nullptr);
      sm = s_chain(fam, sigma, bm, L + 2, nullptr, nullptr);
    }
    for (int k = 2; k <= L + 2; ++k) out.dS[k][j] = (1.0 / (2 * h)) * (sp[k] - sm[k]);
  }
  return out;
}

namespace {

RadialProfile theta_b(const ProfileFamily& fam, const SProfiles& S) {
  RadialProfile th = zeros_like(fam.ctx->grid);
  for (int k = 1; k <= fam.L; ++k) th = th + S.b[k - 1] * fam.T[k];
  for (int k = 2; k <= fam.L + 2; ++k) th = th + S.S[k];
  return th;
}

}  // namespace

RadialProfile assemble_Qb(const ProfileFamily& fam, const SProfiles& S) { return fam.ctx->Q.Q + theta_b(fam, S); }

double B1_of(const SigmaConstants& k, double eta) { return std::pow(k.B0, 1.0 + eta); }

RadialProfile assemble_Qb_localized(const ProfileFamily& fam, const SProfiles& S, double B1) {
  const auto& g = fam.ctx->grid;
  if (2 * B1 > g->ymax()) throw Error(ErrorKind::domain, "2 B1 exceeds the grid");
  return fam.ctx->Q.Q + cutoff_profile(g, B1) * theta_b(fam, S);
}

std::vector<double> modulation_bdot(const std::vector<double>& b, double C_b1) {
  int L = static_cast<int>(b.size());
  std::vector<double> r(L);
  for (int k = 1; k <= L; ++k) {
    double next = k < L ? b[k] : 0.0;
    r[k - 1] = -(2.0 * k - 2.0 + C_b1) * b[0] * b[k - 1] + next;
  }
  return r;
}

PsiParts residual_Psi(const ProfileFamily& fam, const SigmaBundle& sigma, const SProfiles& S,
                      std::vector<double> b_dot, double B1_localize) {
  const auto& c = *fam.ctx;
  int L = fam.L;
  const auto& b = S.b;
  double b1 = b[0], C = sigma.k.C_b1;
  if (b_dot.empty()) b_dot = modulation_bdot(b, C);
  auto law = modulation_bdot(b, C);
  auto zero = zeros_like(c.grid);

  // d_s Theta
  RadialProfile P = zero;
  for (int k = 1; k <= L; ++k) P = P + b_dot[k - 1] * fam.T[k];
  for (int k = 2; k <= L + 2; ++k)
    for (int j = 1; j <= L; ++j) P = P + b_dot[j - 1] * S.dS[k][j];
  // b1 LQ + L(sum b_k T_k), using L T_k = -T_(k-1)
  for (int k = 2; k <= L; ++k) P = P - b[k - 1] * fam.T[k - 1];
  // L S_k = -F_k
  for (int k = 2; k <= L + 2; ++k) P = P - S.F[k];
  // b1 Lambda Theta
  for (int k = 1; k <= L; ++k) P = P + (b1 * b[k - 1]) * lambda_op(fam.T[k]);
  for (int k = 2; k <= L + 2; ++k) P = P + b1 * lambda_op(S.S[k]);
  // nonlinearity: degree <= L+2 parts plus the remainder, summed separately
  for (int i = 2; i <= L + 2; ++i) P = P + nonlinear_part(fam, b, S.S, i);
  auto fs = theta_factors(fam, b, S.S);
  auto R1 = taylor_terms(fam, fs, 2, L + 2, L + 3, (L + 2) * (L + 2));
  auto th = theta_b(fam, S);
  RadialProfile R2(c.grid, std::vector<double>(c.grid->size()));
  for (int i = 0; i < R2.size(); ++i) R2.v[i] = taylor_tail(c.Q.Q[i], th[i], L + 3);
  P = P + 3.0 * shift_power(R1 + R2, -2);

  PsiParts out;
  out.Mod = zero;
  for (int k = 1; k <= L; ++k) {
    double coef = b_dot[k - 1] - law[k - 1];
    if (coef == 0.0) continue;
    RadialProfile dir = fam.T[k];
    for (int j = k + 1; j <= L + 2; ++j) dir = dir + S.dS[j][k];
    out.Mod = out.Mod + coef * dir;
  }
  out.Psi = P - out.Mod;
  out.Psi.origin.reset();
  out.Psi.tail.reset();

  if (B1_localize > 0) {
    auto chi = cutoff_profile(c.grid, B1_localize);
    auto comm = L_of_cut_kernel(c, th, B1_localize);
    auto Psi = out.Psi;
    for (int i = 0; i < Psi.size(); ++i) {
      double y = c.grid->y[i], x = y / B1_localize;
      if (x <= 1.0) continue;
      double ch = chi[i], q = c.Q.Q[i], t = th[i];
      double nl_loc = std::sin(2 * q + 2 * ch * t) - std::sin(2 * q) - 2 * std::cos(2 * q) * ch * t;
      double nl = std::sin(2 * q + 2 * t) - std::sin(2 * q) - 2 * std::cos(2 * q) * t;
      Psi.v[i] = ch * out.Psi[i] + (1 - ch) * b1 * c.LQ[i] + comm[i] + b1 * y * chi_d1(x) / B1_localize * t +
                 3.0 / (y * y) * (nl_loc - ch * nl);
    }
    out.Psi = Psi;
    out.Mod = chi * out.Mod;
  }
  return out;
}

double weighted_norm2(const RadialProfile& f, double w_power, double Y) {
  auto g = map_values(f, [w_power](double y, double v) { return v * v / (1.0 + std::pow(y, w_power)); });
  auto one = sample(f.grid, [](double) { return 1.0; });
  return inner(g, one, Y);
}

AdmissibilityReport check_admissible(const RadialProfile& f, int p1, int p2, double y_a, double y_b,
                                     double slope_tol) {
  AdmissibilityReport r;
  if (!f.origin) {
    r.detail = "no origin series";
    return r;
  }
  const Series& s = *f.origin;
  r.origin_power = s.leading_power(1e-10);
  double mx = 0.0, ev = 0.0;
  for (int q = s.p; q < s.order(); ++q) {
    double a = std::abs(s.coeff(q));
    mx = std::max(mx, a);
    if (q % 2 == 0) ev = std::max(ev, a);
  }
  r.odd_parity = ev <= 1e-8 * mx;
  bool ok = r.odd_parity && r.origin_power == 2 * p1 + 1;
  auto d = f;
  for (int j = 0; j <= 2; ++j) {
    if (j > 0) d = differentiate(d, 1);
    double sl = loglog_slope(d, y_a, y_b);
    r.tail_slopes.push_back(sl);
    double target = 2.0 * p2 - 2.0 - j;
    double tol = target == 0.0 ? slope_tol : slope_tol * std::abs(target);
    // j >= 1: upper bound on the slope
    bool good = j == 0 ? std::abs(sl - target) <= tol : sl <= target + tol;
    if (!good) ok = false;
  }
  r.ok = ok;
  r.detail = "origin power " + std::to_string(r.origin_power);
  return r;
}

PhiBasis make_phi_basis(const ProfileFamily& fam, double M) {
  const auto& c = *fam.ctx;
  PhiBasis b;
  b.M = M;
  b.L = fam.L;
  b.phi = build_PhiM(c, M, fam.L, fam.T);
  std::vector<RadialProfile> ext = b.phi.Lj;
  while (static_cast<int>(ext.size()) < 2 * fam.L + 1) ext.push_back(apply_L(c, ext.back()));
  for (int k = 0; k <= fam.L; ++k) {
    RadialProfile s = b.phi.c[0] * ext[k];
    for (int j = 1; j <= fam.L; ++j) s = s + b.phi.c[j] * ext[j + k];
    b.LkPhi.push_back(s);
  }
  b.LQ_Phi = inner(c.LQ, b.phi.Phi);
  return b;
}

}  // namespace blab
