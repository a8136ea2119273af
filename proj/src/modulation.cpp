#include "blowup_lab/modulation.hpp"

#include <algorithm>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <Eigen/Dense>

#include "blowup_lab/errors.hpp"

namespace blab {

namespace odeint = boost::numeric::odeint;

double ModulationState::lambda() const { return std::exp(log_lambda); }

CLaw c_model(double c) {
  return [c](double b1) { return c * std::sqrt(b1); };
}

CLaw c_integral(const ProfileFamily& fam, int samples) {
  std::vector<double> lx, cv;
  for (int i = 0; i < samples; ++i) {
    double b1 = std::pow(10.0, -6.0 + 4.0 * i / (samples - 1));
    lx.push_back(std::log(b1));
    cv.push_back(sigma_constants(fam, b1).C_b1 / std::sqrt(b1));
  }
  double r0 = std::sqrt(std::exp(lx[0])), r1 = std::sqrt(std::exp(lx[1]));
  double slope = (cv[1] - cv[0]) / (r1 - r0);
  double icpt = cv[0] - slope * r0;
  return [lx, cv, slope, icpt](double b1) {
    double x = std::log(b1);
    double r;
    if (x <= lx.front()) {
      r = icpt + slope * std::sqrt(b1);
    } else if (x >= lx.back()) {
      r = cv.back();
    } else {
      auto it = std::upper_bound(lx.begin(), lx.end(), x);
      size_t i = it - lx.begin() - 1;
      double w = (x - lx[i]) / (lx[i + 1] - lx[i]);
      r = (1 - w) * cv[i] + w * cv[i + 1];
    }
    return r * std::sqrt(b1);
  };
}

ModulationRhs modulation_rhs(const ModulationState& st, const CLaw& C) {
  int L = static_cast<int>(st.b.size());
  double b1 = st.b[0];
  if (!(b1 >= 0.0)) throw Error(ErrorKind::domain, "b1 must stay nonnegative");
  double c = C(b1);
  ModulationRhs r;
  r.db.resize(L);
  for (int k = 1; k <= L; ++k) {
    double next = k < L ? st.b[k] : 0.0;
    r.db[k - 1] = -(2.0 * k - 2.0 + c) * b1 * st.b[k - 1] + next;
  }
  r.dlog_lambda = -b1;
  r.dlambda = -b1 * st.lambda();
  r.dt = std::exp(2 * st.log_lambda);
  return r;
}

ModulationState default_initial_state(int L, double s0) {
  ModulationState st;
  st.s = s0;
  for (int k = 1; k <= L; ++k) st.b.push_back(0.5 * std::pow(s0, -k + 1.0 / 3.0));
  return st;
}

std::vector<ModulationState> integrate_modulation(const ModulationState& st0, double s_end, const CLaw& C,
                                                  const IntegrateOptions& o) {
  if (!(s_end > st0.s)) throw Error(ErrorKind::parameter, "s_end must exceed s0");
  int L = static_cast<int>(st0.b.size());
  using Vec = std::vector<double>;
  Vec x(st0.b);
  x.push_back(st0.log_lambda);
  x.push_back(st0.t);
  auto rhs = [&](const Vec& x, Vec& dx, double s) {
    ModulationState st;
    st.b.assign(x.begin(), x.begin() + L);
    st.log_lambda = x[L];
    st.s = s;
    auto r = modulation_rhs(st, C);
    dx.resize(L + 2);
    for (int k = 0; k < L; ++k) dx[k] = r.db[k];
    dx[L] = r.dlog_lambda;
    dx[L + 1] = r.dt;
  };
  std::vector<double> times;
  double l0 = std::log10(st0.s), l1 = std::log10(s_end);
  int n = std::max(2, static_cast<int>(std::ceil((l1 - l0) * o.per_decade)) + 1);
  for (int i = 0; i < n; ++i) times.push_back(std::pow(10.0, l0 + (l1 - l0) * i / (n - 1)));
  times.front() = st0.s;
  times.back() = s_end;
  std::vector<ModulationState> out;
  auto obs = [&](const Vec& x, double s) {
    ModulationState st;
    st.b.assign(x.begin(), x.begin() + L);
    st.log_lambda = x[L];
    st.t = x[L + 1];
    st.s = s;
    out.push_back(st);
  };
  auto stepper = odeint::make_dense_output(o.atol, o.rtol, odeint::runge_kutta_dopri5<Vec>());
  try {
    odeint::integrate_times(stepper, rhs, x, times.begin(), times.end(), 1e-3 * st0.s, obs);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorKind::integration, std::string("modulation integration failed: ") + e.what());
  }
  return out;
}

LambdaFit fit_log_lambda(const std::vector<ModulationState>& tr, double s_lo, double s_hi, bool free_exponent) {
  std::vector<const ModulationState*> w;
  for (const auto& st : tr)
    if (st.s >= s_lo && st.s <= s_hi) w.push_back(&st);
  if (w.size() < 5) throw Error(ErrorKind::fit, "too few samples in the lambda fit window");
  auto solve = [&](double p, LambdaFit& f) {
    Eigen::MatrixXd A(w.size(), 2);
    Eigen::VectorXd y(w.size());
    for (size_t i = 0; i < w.size(); ++i) {
      A(i, 0) = -std::pow(w[i]->s, p);
      A(i, 1) = 1.0;
      y(i) = w[i]->log_lambda;
    }
    Eigen::VectorXd c = A.colPivHouseholderQr().solve(y);
    f.kappa = c(0);
    f.c = c(1);
    f.exponent = p;
    double num = (A * c - y).norm(), den = y.norm();
    f.rel_residual = num / den;
    return num;
  };
  LambdaFit best;
  solve(1.0 / 3.0, best);
  if (free_exponent) {
    // golden section on the exponent
    double a = 0.1, b = 0.6;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    LambdaFit f1, f2;
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double e1 = solve(x1, f1), e2 = solve(x2, f2);
    for (int it = 0; it < 80; ++it) {
      if (e1 < e2) {
        b = x2; x2 = x1; e2 = e1; f2 = f1;
        x1 = b - g * (b - a);
        e1 = solve(x1, f1);
      } else {
        a = x1; x1 = x2; e1 = e2; f1 = f2;
        x2 = a + g * (b - a);
        e2 = solve(x2, f2);
      }
    }
    best = e1 < e2 ? f1 : f2;
  }
  return best;
}

namespace {

// log of int_{u0}^inf 3u^2 exp(2c - 2 kappa u) du
double log_model_tail(const LambdaFit& f, double s) {
  double u = std::cbrt(s), k = 2 * f.kappa;
  double poly = u * u / k + 2 * u / (k * k) + 2 / (k * k * k);
  return std::log(3 * poly) + 2 * f.c - k * u;
}

double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

}  // namespace

BlowupTime blowup_time(const std::vector<ModulationState>& tr) {
  if (tr.size() < 10) throw Error(ErrorKind::estimation, "trajectory too short");
  double s_end = tr.back().s;
  BlowupTime bt;
  bt.fit = fit_log_lambda(tr, s_end / 10, s_end);
  if (!(bt.fit.kappa > 0)) throw Error(ErrorKind::estimation, "lambda is not decaying");
  auto half = fit_log_lambda(tr, s_end / std::sqrt(10.0), s_end);
  double lt = log_model_tail(bt.fit, s_end), lt2 = log_model_tail(half, s_end);
  bt.T = tr.back().t + std::exp(lt);
  bt.tail_error = std::abs(std::exp(lt) - std::exp(lt2));
  // T - t_i accumulated backwards in log form, segments integrated with log lambda piecewise linear
  int n = static_cast<int>(tr.size());
  bt.log_remaining.assign(n, 0.0);
  bt.log_remaining[n - 1] = lt;
  for (int i = n - 2; i >= 0; --i) {
    double ds = tr[i + 1].s - tr[i].s;
    double a = 2 * tr[i].log_lambda, b = 2 * tr[i + 1].log_lambda;
    double k = (b - a) / ds;
    // int_0^ds exp(a + k x) dx = exp(a) (exp(k ds) - 1) / k, written for k < 0
    double seg = std::abs(k) * ds < 1e-8 ? a + std::log(ds) : a + std::log(-std::expm1(k * ds)) - std::log(-k);
    bt.log_remaining[i] = log_add(bt.log_remaining[i + 1], seg);
  }
  return bt;
}

double rate_slope(const std::vector<double>& log_remaining, const std::vector<double>& log_lambda) {
  int n = static_cast<int>(log_remaining.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    double x = std::log(std::abs(log_remaining[i]));
    double y = log_lambda[i] - 0.5 * log_remaining[i];
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

RateReport rate_diagnostics(const std::vector<ModulationState>& tr, const BlowupTime& bt) {
  RateReport r;
  r.s_hi = tr.back().s;
  r.s_lo = r.s_hi / 100;
  std::vector<double> lr, ll, R;
  for (size_t i = 0; i < tr.size(); ++i) {
    if (tr[i].s < r.s_lo || i + 1 == tr.size()) continue;
    lr.push_back(bt.log_remaining[i]);
    ll.push_back(tr[i].log_lambda);
    R.push_back(std::exp(tr[i].log_lambda + std::log(std::abs(bt.log_remaining[i])) - 0.5 * bt.log_remaining[i]));
  }
  if (lr.size() < 5) throw Error(ErrorKind::estimation, "rate window too short");
  r.slope = rate_slope(lr, ll);
  double sx = 0, sy = 0;
  int n = static_cast<int>(lr.size());
  for (int i = 0; i < n; ++i) {
    sx += std::log(std::abs(lr[i]));
    sy += ll[i] - 0.5 * lr[i];
  }
  double mx = sx / n, my = sy / n, res = 0;
  for (int i = 0; i < n; ++i) {
    double e = (ll[i] - 0.5 * lr[i]) - (my + r.slope * (std::log(std::abs(lr[i])) - mx));
    res += e * e;
  }
  r.slope_residual = std::sqrt(res / n);
  double mn = *std::min_element(R.begin(), R.end()), mxR = *std::max_element(R.begin(), R.end());
  double mean = 0;
  for (double v : R) mean += v;
  mean /= R.size();
  r.R_variation = (mxR - mn) / mean;
  return r;
}

double bootstrap_ratio(const std::vector<ModulationState>& tr, double eta) {
  double worst = 0.0;
  for (const auto& st : tr)
    for (size_t k = 2; k <= st.b.size(); ++k)
      worst = std::max(worst, std::abs(st.b[k - 1]) / std::pow(st.b[0], k + 0.5 + eta / 10));
  return worst;
}

}  // namespace blab
