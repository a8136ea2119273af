#include "blowup_lab/linearized.hpp"

#include <cmath>

#include "blowup_lab/cutoff.hpp"
#include "blowup_lab/errors.hpp"

namespace blab {

namespace {

Series lambda_series(const Series& s) { return s.deriv().shift(1); }

// overwrite near-origin values from the result series
RadialProfile finish(RadialProfile r, std::optional<Series> s) {
  r.origin = std::move(s);
  if (r.origin) {
    const RadialGrid& g = *r.grid;
    for (int i = 0; i < r.size() && g.y[i] <= g.series_radius; ++i) r.v[i] = r.origin->eval(g.y[i]);
  }
  return r;
}

// r = a f'' + b(y) f' + p(y) f with coefficient profiles given pointwise
RadialProfile second_order(const RadialProfile& f, double a, const RadialProfile* b1, const RadialProfile* p0) {
  auto d1 = differentiate(f, 1);
  RadialProfile r(f.grid, std::vector<double>(f.size(), 0.0));
  if (a != 0.0) {
    auto d2 = differentiate(f, 2);
    for (int i = 0; i < r.size(); ++i) r.v[i] = a * d2[i];
  }
  for (int i = 0; i < r.size(); ++i) {
    if (b1) r.v[i] += (*b1)[i] * d1[i];
    if (p0) r.v[i] += (*p0)[i] * f[i];
  }
  return r;
}

}  // namespace

LinearizedContext build_context(const StationaryMap& Q) {
  if (Q.d != 7) throw Error(ErrorKind::parameter, "the linearized operator is built for d = 7");
  LinearizedContext c;
  c.Q = Q;
  c.grid = Q.Q.grid;
  c.a0 = Q.a0;
  c.a1 = Q.a1;
  c.LQ = Q.LQ;
  c.V = divide(lambda_op(c.LQ), c.LQ);
  c.V.origin = divide(lambda_series(*c.LQ.origin), *c.LQ.origin);
  c.Z = map_values(Q.Q, [](double, double q) { return 6.0 * std::cos(2.0 * q); });
  c.Z.origin = 6.0 * cos_of(2.0 * *Q.Q.origin);
  auto LV = lambda_op(c.V);
  c.Zt = map_values(c.V, [](double, double v) { return (v + 1) * (v + 1) + 5 * (v + 1); }) - LV;
  Series v1 = *c.V.origin + Series::constant(1.0, c.V.origin->terms());
  c.Zt.origin = v1 * v1 + 5.0 * v1 - *LV.origin;
  c.Gamma = compute_Gamma(c);
  return c;
}

RadialProfile compute_Gamma(const LinearizedContext& c) {
  const RadialGrid& g = *c.grid;
  int n = g.size();
  // g(y) = 1 / (y^6 LQ^2); H(y) = int_y^inf g
  RadialProfile gi(c.grid, std::vector<double>(n));
  for (int i = 0; i < n; ++i) gi.v[i] = 1.0 / (std::pow(g.y[i], 6) * c.LQ[i] * c.LQ[i]);
  Series den = (*c.LQ.origin * *c.LQ.origin).shift(6);
  Series gs = divide(Series::constant(1.0, den.terms()), den);
  Series anti = gs.antideriv();
  // beyond the grid LQ = 2a0/y^2 - 3a1/y^3 + O(y^-6), so int_Y^inf g = 1/(4 a0^2 (Y - 3a1/(2a0)))
  double Y = g.ymax();
  std::vector<double> H(n);
  H[n - 1] = 1.0 / (4.0 * c.a0 * c.a0 * (Y - 1.5 * c.a1 / c.a0));
  for (int i = n - 2; i >= 0; --i) {
    int s = g.cell_start[i];
    double acc = 0.0;
    for (int m = 0; m < 4; ++m) acc += g.cell_w[i][m] * gi.v[s + m];
    H[i] = H[i + 1] + acc;
  }
  // near the origin H = K - anti, matched where the series is still accurate
  int j = std::max(0, g.index_at_least(g.series_radius) - 1);
  double K = H[j] + anti.eval(g.y[j]);
  RadialProfile G(c.grid, std::vector<double>(n));
  for (int i = 0; i < n; ++i) G.v[i] = c.LQ[i] * (g.y[i] <= g.series_radius ? K - anti.eval(g.y[i]) : H[i]);
  Series h = Series::constant(K, anti.order()) - anti;
  G.origin = *c.LQ.origin * h;
  G.tail = TailModel{1.0 / (2.0 * c.a0), -3.0, {}, Y};
  return G;
}

RadialProfile apply_A(const LinearizedContext& c, const RadialProfile& f) {
  auto Vy = shift_power(c.V, -1);
  auto r = second_order(f, 0.0, nullptr, &Vy);
  auto d1 = differentiate(f, 1);
  for (int i = 0; i < r.size(); ++i) r.v[i] -= d1[i];
  std::optional<Series> s;
  if (f.origin) s = -f.origin->deriv() + (*c.V.origin * *f.origin).shift(-1);
  return finish(r, s);
}

RadialProfile apply_Astar(const LinearizedContext& c, const RadialProfile& f) {
  auto p = map_values(c.V, [](double y, double v) { return (6.0 + v) / y; });
  auto r = second_order(f, 0.0, nullptr, &p);
  auto d1 = differentiate(f, 1);
  for (int i = 0; i < r.size(); ++i) r.v[i] += d1[i];
  std::optional<Series> s;
  if (f.origin) {
    Series six = Series::constant(6.0, c.V.origin->terms());
    s = f.origin->deriv() + ((six + *c.V.origin) * *f.origin).shift(-1);
  }
  return finish(r, s);
}

namespace {

RadialProfile schrodinger(const LinearizedContext& c, const RadialProfile& f, const RadialProfile& pot) {
  auto b = map_values(f, [](double y, double) { return -6.0 / y; });
  auto p = map_values(pot, [](double y, double z) { return z / (y * y); });
  auto r = second_order(f, -1.0, &b, &p);
  std::optional<Series> s;
  if (f.origin)
    s = -f.origin->deriv().deriv() - 6.0 * f.origin->deriv().shift(-1) + (*pot.origin * *f.origin).shift(-2);
  return finish(r, s);
}

}  // namespace

RadialProfile apply_L(const LinearizedContext& c, const RadialProfile& f) { return schrodinger(c, f, c.Z); }
RadialProfile apply_Ltilde(const LinearizedContext& c, const RadialProfile& f) {
  return schrodinger(c, f, c.Zt);
}

RadialProfile apply_L_power(const LinearizedContext& c, const RadialProfile& f, int k) {
  RadialProfile r = f;
  for (int j = 0; j < k; ++j) r = apply_L(c, r);
  return r;
}

Inverse invert_L(const LinearizedContext& c, const RadialProfile& f) {
  if (!f.origin) throw Error(ErrorKind::singularity, "inversion needs origin data for the source");
  auto F = integrate_cumulative(f * c.LQ, 6);
  auto Aw = divide(F, shift_power(c.LQ, 6));
  auto H = integrate_cumulative(divide(Aw, c.LQ), 0);
  auto w = -(c.LQ * H);
  return {w, Aw};
}

RadialProfile invert_L_power(const LinearizedContext& c, const RadialProfile& f, int k) {
  RadialProfile r = f;
  for (int j = 0; j < k; ++j) r = invert_L(c, r).w;
  return r;
}

std::vector<RadialProfile> adapted_derivatives(const LinearizedContext& c, const RadialProfile& f, int i_max) {
  std::vector<RadialProfile> out{f};
  for (int i = 0; i < i_max; ++i)
    out.push_back(i % 2 == 1 ? apply_Astar(c, out.back()) : apply_A(c, out.back()));
  return out;
}

RadialProfile cutoff_profile(GridPtr g, double M) {
  return sample(g, [M](double y) { return chi(y / M); }, Series::constant(1.0, 64));
}

RadialProfile L_of_cut_kernel(const LinearizedContext& c, const RadialProfile& f, double M) {
  auto d1 = differentiate(f, 1);
  RadialProfile r(c.grid, std::vector<double>(f.size(), 0.0));
  for (int i = 0; i < r.size(); ++i) {
    double y = c.grid->y[i], x = y / M;
    if (x <= 1.0 || x >= 2.0) continue;
    double c1 = chi_d1(x) / M, c2 = chi_d2(x) / (M * M);
    r.v[i] = -c2 * f[i] - 2.0 * c1 * d1[i] - 6.0 / y * c1 * f[i];
  }
  r.origin = Series(0, std::vector<double>(16, 0.0));
  return r;
}

PhiM build_PhiM(const LinearizedContext& c, double M, int L, const std::vector<RadialProfile>& T) {
  if (M < 10.0) throw Error(ErrorKind::parameter, "M must be at least 10");
  if (static_cast<int>(T.size()) <= L) throw Error(ErrorKind::parameter, "need T_0 .. T_L");
  PhiM p;
  p.M = M;
  p.Lj.push_back(cutoff_profile(c.grid, M) * c.LQ);
  if (L >= 1) p.Lj.push_back(L_of_cut_kernel(c, c.LQ, M));
  for (int j = 2; j <= L; ++j) p.Lj.push_back(apply_L(c, p.Lj.back()));
  p.chiLQ_LQ = inner(p.Lj[0], c.LQ);
  if (!(p.chiLQ_LQ > 1e-300)) throw Error(ErrorKind::construction, "degenerate <chi_M LQ, LQ>");
  p.c.assign(L + 1, 0.0);
  p.c[0] = 1.0;
  for (int k = 1; k <= L; ++k) {
    double s = 0.0;
    for (int j = 0; j < k; ++j) s += p.c[j] * inner(p.Lj[j], T[k]);
    p.c[k] = (k % 2 == 1 ? 1.0 : -1.0) * s / p.chiLQ_LQ;
  }
  p.Phi = p.c[0] * p.Lj[0];
  for (int k = 1; k <= L; ++k) p.Phi = p.Phi + p.c[k] * p.Lj[k];
  return p;
}

double leibniz_consistency(const LinearizedContext& c, const RadialProfile& phi, const RadialProfile& f, int k,
                           double y_lo, double y_hi) {
  if (k < 0 || k > 3) throw Error(ErrorKind::parameter, "leibniz check supports 0 <= k <= 3");
  auto D = [](const RadialProfile& p) { return differentiate(p, 1); };
  auto W = map_values(c.V, [](double y, double v) { return (6.0 + 2.0 * v) / y; });
  W.origin = (Series::constant(6.0, c.V.origin->terms()) + 2.0 * *c.V.origin).shift(-1);
  auto zero = RadialProfile(c.grid, std::vector<double>(phi.size(), 0.0), Series(0, std::vector<double>(64, 0.0)));
  // level n holds phi_{n,0..n}
  std::vector<RadialProfile> cur{-D(phi), phi};
  for (int n = 1; n < 2 * k + 2; ++n) {
    std::vector<RadialProfile> nxt(n + 2, zero);
    if (n % 2 == 0) {
      // apply A to level n = 2m
      for (int i = 0; i <= n; ++i) {
        auto dphi = D(cur[i]);
        if (i % 2 == 0) {
          nxt[i] = nxt[i] - dphi;
          nxt[i + 1] = nxt[i + 1] + cur[i];
        } else {
          nxt[i] = nxt[i] + W * cur[i] - dphi;
          nxt[i + 1] = nxt[i + 1] - cur[i];
        }
      }
    } else {
      // apply A* to level n = 2m+1
      for (int i = 0; i <= n; ++i) {
        auto dphi = D(cur[i]);
        if (i % 2 == 1) {
          nxt[i] = nxt[i] + dphi;
          nxt[i + 1] = nxt[i + 1] + cur[i];
        } else {
          nxt[i] = nxt[i] + W * cur[i] + dphi;
          nxt[i + 1] = nxt[i + 1] - cur[i];
        }
      }
    }
    cur = std::move(nxt);
  }
  auto fi = adapted_derivatives(c, f, 2 * k + 2);
  RadialProfile rec = zero;
  for (int i = 0; i <= 2 * k + 2; ++i) rec = rec + cur[i] * fi[i];
  auto direct = adapted_derivatives(c, phi * f, 2 * k + 2).back();
  int i0 = c.grid->index_at_least(y_lo), i1 = c.grid->index_at_least(y_hi);
  double num = 0.0, den = 0.0;
  for (int i = i0; i < i1; ++i) {
    num = std::max(num, std::abs(direct[i] - rec[i]));
    den = std::max(den, std::abs(direct[i]));
  }
  return den > 0 ? num / den : num;
}

}  // namespace blab
