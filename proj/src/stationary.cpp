#include "blowup_lab/stationary.hpp"

#include <array>
#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/numeric/odeint.hpp>

#include "blowup_lab/errors.hpp"

namespace blab {

namespace odeint = boost::numeric::odeint;
using State2 = std::array<double, 2>;

double gamma_exponent(int d) {
  if (d < 7) throw Error(ErrorKind::domain, "gamma(d) needs d >= 7");
  return 0.5 * (d - 2 - std::sqrt(static_cast<double>(d * d - 8 * d + 8)));
}

std::vector<double> taylor_coefficients(int d, int degree, double slope, double drift) {
  std::vector<double> q(degree + 1, 0.0);
  q[1] = slope;
  for (int n = 3; n <= degree; n += 2) {
    Series s(1, std::vector<double>(q.begin() + 1, q.begin() + n + 1));
    double r = sin_of(2.0 * s).coeff(n);
    q[n] = (0.5 * (d - 1) * r - drift * (n - 2) * q[n - 2]) / ((n - 1.0) * (n + d - 1.0));
  }
  std::vector<double> odd;
  for (int n = 1; n <= degree; n += 2) odd.push_back(q[n]);
  return odd;
}

namespace {

Series odd_series(const std::vector<double>& odd) {
  std::vector<double> a(2 * odd.size() - 1, 0.0);
  for (size_t k = 0; k < odd.size(); ++k) a[2 * k] = odd[k];
  return {1, a};
}

}  // namespace

StationaryMap solve_Q(int d, const ShootOptions& o) {
  if (d < 2) throw Error(ErrorKind::parameter, "d must be at least 2");
  auto grid = make_log_grid(o.y_min, o.y_max, o.n, 1.0, d, o.y0);
  StationaryMap m;
  m.d = d;
  m.origin_coeffs = taylor_coefficients(d, std::max(o.series_degree, o.origin_degree), o.slope);
  Series qs = odd_series(m.origin_coeffs);
  Series lqs = qs.deriv().shift(1);
  Series start = odd_series(taylor_coefficients(d, o.series_degree, o.slope));
  Series lstart = start.deriv().shift(1);
  m.meta = {o.y0, o.atol, o.rtol, o.y_max};

  const auto& y = grid->y;
  int n = grid->size();
  std::vector<double> Qv(n), Pv(n);
  int i0 = grid->index_at_least(o.y0);
  for (int i = 0; i < i0; ++i) {
    Qv[i] = qs.eval(y[i]);
    Pv[i] = lqs.eval(y[i]);
  }
  // log variable x = log y: Q_x = P, P_x = -(d-2) P + (d-1)/2 sin 2Q
  auto rhs = [d](const State2& s, State2& ds, double) {
    ds[0] = s[1];
    ds[1] = -(d - 2.0) * s[1] + 0.5 * (d - 1.0) * std::sin(2.0 * s[0]);
  };
  std::vector<double> xs;
  xs.push_back(std::log(o.y0));
  for (int i = i0; i < n; ++i) xs.push_back(std::log(y[i]));
  State2 st{start.eval(o.y0), lstart.eval(o.y0)};
  int k = 0;
  auto obs = [&](const State2& s, double) {
    if (k > 0) {
      Qv[i0 + k - 1] = s[0];
      Pv[i0 + k - 1] = s[1];
    }
    ++k;
  };
  auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<State2>>(o.atol, o.rtol);
  try {
    odeint::integrate_times(stepper, rhs, st, xs.begin(), xs.end(), 1e-4, obs);
  } catch (const std::exception& e) {
    throw Error(ErrorKind::convergence, std::string("ground state integration failed: ") + e.what());
  }
  for (int i = 0; i < n; ++i)
    if (!std::isfinite(Qv[i])) throw Error(ErrorKind::convergence, "ground state diverged");

  m.Q = RadialProfile(grid, Qv, qs);
  m.LQ = RadialProfile(grid, Pv, lqs);
  if (d >= 7) {
    double gap = std::abs(Qv.back() - std::numbers::pi / 2);
    if (gap > 1e-3)
      throw Error(ErrorKind::convergence, "Q does not approach pi/2, gap " + std::to_string(gap));
    auto deficit = map_values(m.Q, [](double, double q) { return std::numbers::pi / 2 - q; });
    auto tf = fit_tail(deficit, o.tail_a, o.tail_b);
    m.gamma_fit = -tf.exponent;
    auto tc = extract_tail_constants(m, o.tail_a, o.tail_b);
    m.a0 = tc.a0;
    m.a1 = tc.a1;
    m.Q.tail = TailModel{std::numbers::pi / 2, 0.0, {0.0, -m.a0, m.a1}, o.tail_a};
    m.LQ.tail = TailModel{2 * m.a0, -2.0, {-3 * m.a1}, o.tail_a};
  }
  return m;
}

TailConstants fit_tail_constants(const RadialProfile& deficit, double y_a, double y_b) {
  auto c = fit_powers(deficit, y_a, y_b, {-2.0, -3.0, -4.0});
  return {c[0], -c[1], c[2]};
}

TailConstants extract_tail_constants(const StationaryMap& Q, double y_a, double y_b) {
  if (Q.d != 7) throw Error(ErrorKind::parameter, "tail constants are defined for d = 7");
  auto deficit = map_values(Q.Q, [](double, double q) { return std::numbers::pi / 2 - q; });
  auto tc = fit_tail_constants(deficit, y_a, y_b);
  if (!(tc.a0 > 0.0) || !(tc.a1 > 0.0))
    throw Error(ErrorKind::extraction, "nonpositive tail constant a0 = " + std::to_string(tc.a0) +
                                           ", a1 = " + std::to_string(tc.a1));
  return tc;
}

RadialProfile lambda_Q(const StationaryMap& Q) { return Q.LQ; }

RadialProfile ode_residual(const RadialProfile& Q, const RadialProfile& LQ, int d) {
  auto q1 = shift_power(LQ, -1);
  auto q2 = differentiate(q1, 1);
  RadialProfile r(Q.grid, std::vector<double>(Q.size()));
  for (int i = 0; i < Q.size(); ++i) {
    double y = Q.y(i);
    double res = q2[i] + (d - 1.0) / y * q1[i] - 0.5 * (d - 1.0) / (y * y) * std::sin(2 * Q[i]);
    r.v[i] = res / (1.0 + std::abs(q2[i]));
  }
  return r;
}

namespace {

struct ShrinkerPath {
  std::vector<double> phi;  // samples at y = y0 + k * dy
  int diverge_sign = 0;
  double y_reached = 0.0;
};

constexpr double kShrinkDy = 0.01;

ShrinkerPath shrinker_path(int d, double slope, double y_end) {
  const double y0 = 1e-3;
  auto c = taylor_coefficients(d, 9, slope, -0.5);
  Series s = odd_series(c);
  State2 st{s.eval(y0), s.deriv().eval(y0)};
  auto rhs = [d](const State2& u, State2& du, double y) {
    du[0] = u[1];
    du[1] = -((d - 1.0) / y - 0.5 * y) * u[1] + 0.5 * (d - 1.0) / (y * y) * std::sin(2.0 * u[0]);
  };
  auto stepper = odeint::make_dense_output(1e-12, 1e-10, odeint::runge_kutta_dopri5<State2>());
  stepper.initialize(st, y0, 1e-4);
  ShrinkerPath p;
  double next = y0;
  State2 tmp;
  while (stepper.current_time() < y_end) {
    stepper.do_step(rhs);
    while (next <= stepper.current_time() && next <= y_end) {
      stepper.calc_state(next, tmp);
      p.phi.push_back(tmp[0]);
      next += kShrinkDy;
    }
    double ph = stepper.current_state()[0];
    if (std::abs(ph) > 10.0 || !std::isfinite(ph)) {
      p.diverge_sign = ph > 0 ? 1 : -1;
      break;
    }
  }
  p.y_reached = stepper.current_time();
  return p;
}

int crossings(const std::vector<double>& phi, size_t upto) {
  int c = 0;
  const double h = std::numbers::pi / 2;
  for (size_t k = 1; k < std::min(upto, phi.size()); ++k)
    if ((phi[k - 1] - h) * (phi[k] - h) < 0) ++c;
  return c;
}

}  // namespace

ShrinkerResult shoot_shrinker(int d, double slope, double y_end) {
  auto p = shrinker_path(d, slope, y_end);
  ShrinkerResult r;
  r.slope = slope;
  r.diverge_sign = p.diverge_sign;
  r.y_reached = p.y_reached;
  r.intersections = crossings(p.phi, p.phi.size());
  return r;
}

std::vector<ShrinkerResult> solve_shrinker(int d, const std::vector<double>& slopes) {
  if (d < 3 || d > 7) throw Error(ErrorKind::parameter, "shrinker sweep supports 3 <= d <= 7");
  std::vector<ShrinkerResult> out;
  std::vector<ShrinkerPath> paths;
  for (double s : slopes) {
    out.push_back(shoot_shrinker(d, s));
    paths.push_back(shrinker_path(d, s, 20.0));
  }
  std::vector<ShrinkerResult> found;
  for (size_t i = 0; i + 1 < slopes.size(); ++i) {
    if (paths[i].diverge_sign == 0 || paths[i + 1].diverge_sign == 0) continue;
    if (paths[i].diverge_sign == paths[i + 1].diverge_sign) continue;
    double lo = slopes[i], hi = slopes[i + 1];
    int slo = paths[i].diverge_sign;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      double mid = 0.5 * (lo + hi);
      auto pm = shrinker_path(d, mid, 20.0);
      if (pm.diverge_sign == slo) lo = mid;
      else hi = mid;
    }
    auto pl = shrinker_path(d, lo, 20.0), ph = shrinker_path(d, hi, 20.0);
    size_t sep = 0;
    while (sep < pl.phi.size() && sep < ph.phi.size() && std::abs(pl.phi[sep] - ph.phi[sep]) < 1e-2) ++sep;
    ShrinkerResult r;
    r.slope = 0.5 * (lo + hi);
    r.regular = true;
    r.intersections = crossings(pl.phi, sep);
    r.y_reached = 1e-3 + sep * kShrinkDy;
    found.push_back(r);
  }
  out.insert(out.end(), found.begin(), found.end());
  return out;
}

}  // namespace blab
