#include "blowup_lab/pde_sim.hpp"

#include <algorithm>
#include <cmath>
// the pchip header calls isnan unqualified
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>
#include <Eigen/Dense>
#include <memory>
#include <numbers>

#include "blowup_lab/errors.hpp"

namespace blab {

std::vector<double> make_sim_grid(const SimParams& p) {
  if (p.n < 16 || !(p.y_max > 0) || !(p.sinh_scale > 0)) throw Error(ErrorKind::parameter, "bad simulation grid");
  double xm = std::asinh(p.y_max / p.sinh_scale);
  std::vector<double> y(p.n + 1);
  for (int i = 0; i <= p.n; ++i) y[i] = p.sinh_scale * std::sinh(xm * i / p.n);
  y.back() = p.y_max;
  return y;
}

SimState make_sim_state(const std::function<double(double)>& u0, const SimParams& p) {
  SimState s;
  s.d = p.d;
  s.y = make_sim_grid(p);
  s.u.resize(s.y.size());
  for (size_t i = 0; i < s.y.size(); ++i) s.u[i] = u0(s.y[i]);
  s.u[0] = 0.0;
  s.outer_value = s.u.back();
  s.lambda_est = reference_lambda(s);
  return s;
}

namespace {

// a1, a3 of a1 y + a3 y^3 through nodes 1 and 2
std::pair<double, double> odd_fit(const SimState& s) {
  double y1 = s.y[1], y2 = s.y[2], u1 = s.u[1], u2 = s.u[2];
  double det = y1 * y2 * (y2 * y2 - y1 * y1);
  return {(u1 * y2 * y2 * y2 - u2 * y1 * y1 * y1) / det, (y1 * u2 - y2 * u1) / det};
}

}  // namespace

double reference_lambda(const SimState& s) {
  double a1 = odd_fit(s).first;
  return a1 > 0 ? 1.0 / a1 : std::numeric_limits<double>::infinity();
}

std::function<double(double)> sim_interpolant(const SimState& s) {
  using Pchip = boost::math::interpolators::pchip<std::vector<double>>;
  auto [a1, a3] = odd_fit(s);
  auto ip = std::make_shared<Pchip>(std::vector<double>(s.y), std::vector<double>(s.u));
  double y2 = s.y[2], ymax = s.y.back(), outer = s.outer_value;
  return [ip, a1, a3, y2, ymax, outer](double y) {
    if (y <= y2) return a1 * y + a3 * y * y * y;
    if (y >= ymax) return outer;
    return (*ip)(y);
  };
}

SimState step(const SimState& s, double dtau) {
  int n = static_cast<int>(s.y.size()) - 1;
  double k = s.d - 1.0;
  const auto& y = s.y;
  std::vector<double> a(n), b(n), c(n), r(n);
  for (int i = 1; i < n; ++i) {
    double hm = y[i] - y[i - 1], hp = y[i + 1] - y[i], hs = hm + hp;
    double lo = 2 / (hm * hs) - k / y[i] * hp / (hm * hs);
    double up = 2 / (hp * hs) + k / y[i] * hm / (hp * hs);
    double di = -2 / (hm * hp) + k / y[i] * (hp - hm) / (hm * hp) - k / (y[i] * y[i]);
    double u = s.u[i];
    double nl = -0.5 * k / (y[i] * y[i]) * (std::sin(2 * u) - 2 * u);
    a[i] = -dtau * lo;
    b[i] = 1 - dtau * di;
    c[i] = -dtau * up;
    r[i] = u + dtau * nl;
  }
  r[n - 1] -= c[n - 1] * s.outer_value;
  // Thomas sweep on rows 1 .. n-1 (u_0 = 0)
  for (int i = 2; i < n; ++i) {
    double m = a[i] / b[i - 1];
    b[i] -= m * c[i - 1];
    r[i] -= m * r[i - 1];
  }
  SimState o = s;
  o.u[n] = s.outer_value;
  o.u[0] = 0.0;
  for (int i = n - 1; i >= 1; --i) {
    double rhs = r[i] - (i < n - 1 ? c[i] * o.u[i + 1] : 0.0);
    o.u[i] = rhs / b[i];
    if (!std::isfinite(o.u[i])) throw Error(ErrorKind::step, "non-finite value in the tridiagonal solve");
  }
  o.dt = s.scale * s.scale * dtau;
  o.t = s.t + o.dt;
  o.lambda_est = s.scale * reference_lambda(o);
  double lr = reference_lambda(s);
  o.s = s.s + dtau / (lr * lr);
  return o;
}

double stable_dtau(const SimState& s, const SimParams& p) {
  double lip = 0.0;
  for (size_t i = 1; i < s.y.size(); ++i)
    lip = std::max(lip, (s.d - 1.0) / (s.y[i] * s.y[i]) * (1 - std::cos(2 * s.u[i])));
  double lr = std::min(reference_lambda(s), 1e3);
  double dt = p.accuracy * lr * lr;
  if (lip > 0) dt = std::min(dt, p.cfl / lip);
  return dt;
}

SimState rescale(const SimState& s) {
  double lr = reference_lambda(s);
  if (!(lr > 0) || !std::isfinite(lr)) throw Error(ErrorKind::step, "cannot rescale without a bubble");
  auto f = sim_interpolant(s);
  SimState o = s;
  for (size_t i = 1; i < s.y.size(); ++i) o.u[i] = f(lr * s.y[i]);
  o.outer_value = f(lr * s.y.back());
  o.u.back() = o.outer_value;
  o.scale = s.scale * lr;
  o.rescale_count = s.rescale_count + 1;
  o.lambda_est = o.scale * reference_lambda(o);
  return o;
}

const char* type_name(TypeClass c) {
  switch (c) {
    case TypeClass::TypeI: return "TypeI";
    case TypeClass::TypeII: return "TypeII";
    default: return "Undetermined";
  }
}

std::function<double(double)> tanh_data(double A) {
  return [A](double r) { return A * std::numbers::pi / 2 * std::tanh(r); };
}

SimRun run_to_blowup(const std::function<double(double)>& u0, const SimParams& p) {
  SimRun run;
  SimState s = make_sim_state(u0, p);
  double umax0 = 0;
  for (double v : s.u) umax0 = std::max(umax0, std::abs(v));
  run.fit.lambda_series.push_back({s.t, s.lambda_est, 0.0});
  double y1 = s.y[1];
  double pending = 0.0;
  for (long it = 0; it < p.max_steps; ++it) {
    s = step(s, stable_dtau(s, p));
    pending += s.dt;
    run.steps = it + 1;
    if (run.steps % p.record_every == 0) {
      run.fit.lambda_series.push_back({s.t, s.lambda_est, pending});
      pending = 0.0;
    }
    if (p.snapshot_every > 0 && run.steps % p.snapshot_every == 0) run.snapshots.push_back(s);
    double lr = reference_lambda(s);
    if (lr < p.trigger * y1) {
      RescaleEvent e{s.t, s.scale * lr, 0.0};
      s = rescale(s);
      e.after = s.lambda_est;
      run.events.push_back(e);
    }
    if (s.lambda_est <= p.stop_lambda) {
      run.blew_up = true;
      break;
    }
    double umax = 0;
    for (double v : s.u) umax = std::max(umax, std::abs(v));
    if (lr > 1e2 || umax < 1e-3 * umax0) {
      run.decayed = true;
      break;
    }
    if (s.t > p.t_max) break;
  }
  if (pending > 0) run.fit.lambda_series.push_back({s.t, s.lambda_est, pending});
  if (!run.blew_up) {
    run.note = run.decayed ? "solution decays, no blowup" : "no blowup within the step budget";
    return run;
  }
  double rem = estimate_remaining(run.fit.lambda_series);
  run.fit = classify(std::move(run.fit.lambda_series), rem);
  return run;
}

std::vector<double> remaining_times(const std::vector<LambdaSample>& s, double remaining_end) {
  int n = static_cast<int>(s.size());
  std::vector<double> r(n);
  bool have_dt = false;
  for (int i = 1; i < n; ++i) have_dt = have_dt || s[i].dt > 0;
  r[n - 1] = remaining_end;
  for (int i = n - 2; i >= 0; --i) r[i] = r[i + 1] + (have_dt ? s[i + 1].dt : s[i + 1].t - s[i].t);
  return r;
}

double estimate_remaining(const std::vector<LambdaSample>& s) {
  if (s.size() < 8) throw Error(ErrorKind::estimation, "lambda series too short");
  auto back = remaining_times(s, 0.0);
  double lend = s.back().lambda;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (int i = static_cast<int>(s.size()) - 1; i >= 0 && s[i].lambda <= 2 * lend; --i) {
    double x = -back[i], yv = s[i].lambda * s[i].lambda;
    sx += x; sy += yv; sxx += x * x; sxy += x * yv;
    ++m;
  }
  if (m < 4) throw Error(ErrorKind::estimation, "too few samples near the end of the lambda series");
  double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  double icpt = (sy - slope * sx) / m;
  if (!(slope < 0)) throw Error(ErrorKind::estimation, "lambda^2 is not decreasing");
  return icpt / -slope;
}

BlowupFit classify(std::vector<LambdaSample> series, double remaining_end, double skip_decades,
                   double tail_decades) {
  BlowupFit f;
  f.remaining_end = remaining_end;
  f.T = series.back().t + remaining_end;
  f.lambda_series = std::move(series);
  auto rems = remaining_times(f.lambda_series, remaining_end);
  std::vector<double> x, lr;  // log(T - t), log rho
  double r0 = rems.front(), rend = rems.back();
  double hi = r0 * std::pow(10.0, -skip_decades), lo = rend * std::pow(10.0, tail_decades);
  for (size_t i = 0; i < rems.size(); ++i) {
    double rem = rems[i];
    if (rem > hi || rem < lo || !(rem > 0)) continue;
    x.push_back(std::log(rem));
    lr.push_back(std::log(f.lambda_series[i].lambda) - 0.5 * std::log(rem));
  }
  if (x.size() < 10) return f;
  f.decades = (x.front() - x.back()) / std::log(10.0);
  if (f.decades < 2.0) return f;
  auto regress = [](const std::vector<double>& xs, const std::vector<double>& ys, double& res) {
    int n = static_cast<int>(xs.size());
    Eigen::MatrixXd A(n, 2);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) {
      A(i, 0) = xs[i];
      A(i, 1) = 1;
      b(i) = ys[i];
    }
    Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
    res = (A * c - b).norm() / std::sqrt(static_cast<double>(n));
    return c(0);
  };
  double res;
  f.rho_slope = regress(x, lr, res);
  std::vector<double> ll(x.size());
  for (size_t i = 0; i < x.size(); ++i) ll[i] = std::log(std::abs(x[i]));
  f.rate_slope = regress(ll, lr, f.rate_residual);
  // monotonicity on 20 bins in log(T - t)
  int bins = 20;
  std::vector<double> mean(bins, 0.0);
  std::vector<int> cnt(bins, 0);
  for (size_t i = 0; i < x.size(); ++i) {
    int b = std::min(bins - 1, static_cast<int>((x.front() - x[i]) / (x.front() - x.back()) * bins));
    mean[b] += lr[i];
    ++cnt[b];
  }
  f.rho_decreasing = true;
  double prev = std::numeric_limits<double>::infinity();
  for (int b = 0; b < bins; ++b) {
    if (cnt[b] == 0) continue;
    double m = mean[b] / cnt[b];
    if (!(m < prev)) f.rho_decreasing = false;
    prev = m;
  }
  if (f.rho_decreasing && f.rate_slope <= -0.5 && lr.front() - lr.back() > std::log(1.25))
    f.type_class = TypeClass::TypeII;
  else if (std::abs(f.rho_slope) <= 0.05)
    f.type_class = TypeClass::TypeI;
  return f;
}

EnergyResult energy(const std::vector<double>& r, const std::vector<double>& u, int d) {
  int n = static_cast<int>(r.size());
  if (n < 3 || u.size() != r.size()) throw Error(ErrorKind::parameter, "energy needs matching nodes");
  std::vector<double> e(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double du;
    if (i == 0) du = (u[1] - u[0]) / (r[1] - r[0]);
    else if (i == n - 1) du = (u[n - 1] - u[n - 2]) / (r[n - 1] - r[n - 2]);
    else {
      double hm = r[i] - r[i - 1], hp = r[i + 1] - r[i];
      du = (hm * hm * u[i + 1] - hp * hp * u[i - 1] + (hp * hp - hm * hm) * u[i]) / (hm * hp * (hm + hp));
    }
    double s = std::sin(u[i]);
    e[i] = r[i] > 0 ? (du * du + (d - 1.0) * s * s / (r[i] * r[i])) * std::pow(r[i], d - 1) : 0.0;
  }
  double total = 0, last = 0, cut = r.back() / 2;
  for (int i = 0; i + 1 < n; ++i) {
    double seg = 0.5 * (e[i] + e[i + 1]) * (r[i + 1] - r[i]);
    total += seg;
    if (r[i] >= cut) last += seg;
  }
  EnergyResult res;
  res.value = total;
  res.divergent = !std::isfinite(total) || (total > 0 && last > 1e-3 * total);
  return res;
}

RadialProfile ansatz_profile(const ProfileFamily& fam, const std::vector<double>& b) {
  RadialProfile q = fam.ctx->Q.Q;
  for (size_t k = 1; k <= b.size(); ++k) q = q + b[k - 1] * fam.T[k];
  return q;
}

Decomposition decompose_modulation(const std::function<double(double)>& u, const ProfileFamily& fam,
                                   const PhiBasis& basis, double lambda_guess,
                                   std::vector<double> b_guess) {
  const auto& c = *fam.ctx;
  int L = basis.L;
  if (!(lambda_guess > 0)) throw Error(ErrorKind::parameter, "lambda guess must be positive");
  b_guess.resize(L, 0.0);
  double ycut = 2 * basis.M;
  int ncut = std::min(c.grid->size(), c.grid->index_at_least(ycut) + 1);
  auto residual = [&](double loglam, const std::vector<double>& b, RadialProfile* q) {
    double lam = std::exp(loglam);
    std::vector<double> v(c.grid->size(), 0.0);
    auto ans = ansatz_profile(fam, b);
    for (int i = 0; i < ncut; ++i) v[i] = u(lam * c.grid->y[i]) - ans[i];
    RadialProfile diff(c.grid, v);
    Eigen::VectorXd g(L + 1);
    for (int k = 0; k <= L; ++k) g(k) = inner(diff, basis.LkPhi[k], ycut) / basis.LQ_Phi;
    if (q) {
      for (int i = ncut; i < c.grid->size(); ++i) v[i] = u(lam * c.grid->y[i]) - ans[i];
      *q = RadialProfile(c.grid, v);
    }
    return g;
  };
  Eigen::VectorXd x(L + 1);
  x(0) = std::log(lambda_guess);
  for (int k = 0; k < L; ++k) x(k + 1) = b_guess[k];
  auto unpack = [L](const Eigen::VectorXd& x) {
    std::vector<double> b(L);
    for (int k = 0; k < L; ++k) b[k] = x(k + 1);
    return b;
  };
  Decomposition d;
  double g_prev = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= 50; ++it) {
    Eigen::VectorXd g = residual(x(0), unpack(x), nullptr);
    // the inner products carry a noise floor near 1e-11; stop once Newton stalls on it
    bool stalled = it > 3 && g.norm() > 0.5 * g_prev;
    g_prev = g.norm();
    Eigen::MatrixXd J(L + 1, L + 1);
    for (int j = 0; j <= L; ++j) {
      double h = j == 0 ? 1e-6 : 1e-7 * std::max(1e-3, std::abs(x(j)));
      Eigen::VectorXd xp = x, xm = x;
      xp(j) += h;
      xm(j) -= h;
      J.col(j) = (residual(xp(0), unpack(xp), nullptr) - residual(xm(0), unpack(xm), nullptr)) / (2 * h);
    }
    Eigen::VectorXd dx = J.fullPivLu().solve(-g);
    if (!dx.allFinite()) break;
    x += dx;
    d.iterations = it;
    double step = dx.lpNorm<Eigen::Infinity>();
    if (step < 1e-12 || (stalled && step < 1e-8)) {
      d.lambda = std::exp(x(0));
      d.b = unpack(x);
      d.residual = residual(x(0), d.b, &d.q).norm();
      return d;
    }
  }
  throw Error(ErrorKind::decomposition, "Newton iteration did not converge in 50 steps");
}

Decomposition decompose_state(const SimState& s, const ProfileFamily& fam, const PhiBasis& basis) {
  auto w = sim_interpolant(s);
  double sc = s.scale;
  return decompose_modulation([w, sc](double r) { return w(r / sc); }, fam, basis, s.lambda_est);
}

std::vector<double> monitor_energies(const RadialProfile& q, const LinearizedContext& ctx,
                                     const std::vector<int>& k_list, double y_cut) {
  int kmax = 0;
  for (int k : k_list) kmax = std::max(kmax, k);
  auto f = adapted_derivatives(ctx, q, 2 * kmax);
  std::vector<double> out;
  for (int k : k_list) out.push_back(inner(f[2 * k], f[2 * k], y_cut));
  return out;
}

}  // namespace blab
