#include "blowup_lab/verification.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <Eigen/Dense>
#include <limits>

#include "blowup_lab/errors.hpp"

namespace blab {

namespace bq = boost::math::quadrature;

double TestFunction::operator()(double y) const {
  double x = y / sigma, P = 0.0;
  for (size_t j = p.size(); j-- > 0;) P = P * x + p[j];
  return y * y * y * (P - shift) * std::exp(-x * x);
}

double TestFunction::deriv(double y) const {
  double x = y / sigma, P = 0.0, dP = 0.0;
  for (size_t j = p.size(); j-- > 0;) {
    dP = dP * x + P;
    P = P * x + p[j];
  }
  dP /= sigma;
  double e = std::exp(-x * x);
  return (3 * y * y * (P - shift) + y * y * y * dP - 2 * y * y * y * x / sigma * (P - shift)) * e;
}

Series TestFunction::origin(int terms) const {
  std::vector<double> poly(terms, 0.0), gauss(terms, 0.0);
  double sp = 1.0;
  for (size_t j = 0; j < p.size() && static_cast<int>(j) < terms; ++j) {
    poly[j] = p[j] / sp;
    sp *= sigma;
  }
  poly[0] -= shift;
  double c = 1.0;
  for (int k = 0; 2 * k < terms; ++k) {
    gauss[2 * k] = c;
    c *= -1.0 / (sigma * sigma) / (k + 1);
  }
  return (Series(0, poly) * Series(0, gauss)).shift(3);
}

TestFunction random_test_function(std::uint64_t seed, bool vanish_at_one) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_int_distribution<int> deg(vanish_at_one ? 1 : 0, 6);
  std::uniform_real_distribution<double> ls(std::log(0.5), std::log(50.0));
  TestFunction f;
  int n = deg(rng);
  for (int j = 0; j <= n; ++j) f.p.push_back(nd(rng));
  f.sigma = std::exp(ls(rng));
  if (vanish_at_one) {
    double x = 1.0 / f.sigma, P = 0.0;
    for (size_t j = f.p.size(); j-- > 0;) P = P * x + f.p[j];
    f.shift = P;
  }
  return f;
}

RadialProfile sample_test_function(GridPtr g, const TestFunction& f) {
  return sample(g, [&](double y) { return f(y); }, f.origin());
}

namespace {

double integrate_01(const std::function<double(double)>& h) {
  bq::tanh_sinh<double> ts;
  return ts.integrate(
      [&](double y) {
        double v = y > 0 ? h(y) : 0.0;
        return std::isfinite(v) ? v : 0.0;
      },
      0.0, 1.0, 1e-13);
}

double integrate_1inf(const std::function<double(double)>& h) {
  return bq::gauss_kronrod<double, 61>::integrate(h, 1.0, std::numeric_limits<double>::infinity(), 15, 1e-12);
}

double margin(double lhs, double rhs) {
  if (lhs == 0.0 && rhs == 0.0) return 0.0;
  return (lhs - rhs) / std::max(std::abs(lhs), std::abs(rhs));
}

}  // namespace

double hardy_origin_margin(int d, int i, const Fn& f, const Fn& df) {
  if (i < 0 || i > 2) throw Error(ErrorKind::parameter, "origin Hardy index must be 0, 1 or 2");
  double a = d - 1.0 - 2 * i;
  // weights folded in before squaring so steep powers near 0 do not overflow
  double lhs = integrate_01([&](double y) { double v = df(y) * std::pow(y, a / 2); return v * v; });
  double rhs = integrate_01([&](double y) { double v = f(y) * std::pow(y, a / 2 - 1); return v * v; });
  double c = 0.25 * (d - 2.0 - 2 * i) * (d - 2.0 - 2 * i);
  return margin(lhs, c * rhs);
}

double hardy_exterior_margin(int d, double alpha, const Fn& f, const Fn& df) {
  if (!(alpha > 0) || std::abs(alpha - 0.5 * (d - 2)) < 1e-12)
    throw Error(ErrorKind::parameter, "exterior Hardy needs alpha > 0 away from (d - 2) / 2");
  double a = d - 1.0 - 2 * alpha;
  double lhs = integrate_1inf([&](double y) { double v = df(y) * std::pow(y, a / 2); return v * v; });
  double rhs = integrate_1inf([&](double y) { double v = f(y) * std::pow(y, a / 2 - 1); return v * v; });
  double c = 0.25 * (d - 2.0 - 2 * alpha) * (d - 2.0 - 2 * alpha);
  return margin(lhs, c * rhs);
}

double hardy_critical_margin(int d, const Fn& f, const Fn& df) {
  double a = 1.0;  // d - 1 - 2 alpha at alpha = (d - 2) / 2
  double lhs = integrate_1inf([&](double y) { double v = df(y); return v * v * std::pow(y, a); });
  double rhs = integrate_1inf([&](double y) {
    double v = f(y), l = 1 + std::log(y);
    return v * v * std::pow(y, a - 2) / (l * l);
  });
  (void)d;
  return margin(lhs, 0.25 * rhs);
}

namespace {

template <class M>
ProbeReport run_hardy(const std::string& id, int samples, std::uint64_t seed, M m) {
  ProbeReport r;
  r.id = id;
  r.samples = samples;
  r.min_margin = samples > 0 ? std::numeric_limits<double>::infinity() : 0.0;
  for (int k = 0; k < samples; ++k) {
    auto f = random_test_function(seed + k, true);
    double v = m([&f](double y) { return f(y); }, [&f](double y) { return f.deriv(y); });
    r.margins.push_back(v);
    r.min_margin = std::min(r.min_margin, v);
    if (v < 0) r.failures.push_back(seed + k);
  }
  return r;
}

}  // namespace

ProbeReport hardy_origin_probe(int d, int i, int samples, std::uint64_t seed) {
  return run_hardy("hardy_origin_i" + std::to_string(i), samples, seed,
                   [&](const Fn& f, const Fn& df) { return hardy_origin_margin(d, i, f, df); });
}

ProbeReport hardy_exterior_probe(int d, double alpha, int samples, std::uint64_t seed) {
  return run_hardy("hardy_exterior_alpha" + std::to_string(alpha), samples, seed,
                   [&](const Fn& f, const Fn& df) { return hardy_exterior_margin(d, alpha, f, df); });
}

ProbeReport hardy_critical_probe(int d, int samples, std::uint64_t seed) {
  return run_hardy("hardy_critical", samples, seed,
                   [&](const Fn& f, const Fn& df) { return hardy_critical_margin(d, f, df); });
}

RadialProfile project_out(const RadialProfile& f, const PhiBasis& basis, int m_max) {
  int n = m_max + 1;
  if (m_max > basis.L) throw Error(ErrorKind::parameter, "projection needs more L^m Phi_M than the basis holds");
  std::vector<double> nrm(n);
  for (int m = 0; m < n; ++m) nrm[m] = norm(basis.LkPhi[m]);
  Eigen::MatrixXd G(n, n);
  Eigen::VectorXd rhs(n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) G(a, b) = inner(basis.LkPhi[a], basis.LkPhi[b]) / (nrm[a] * nrm[b]);
    rhs(a) = inner(f, basis.LkPhi[a]) / nrm[a];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(G);
  double cond = svd.singularValues()(0) / svd.singularValues()(n - 1);
  if (!(cond < 1e12)) throw Error(ErrorKind::construction, "ill-conditioned Gram matrix");
  Eigen::VectorXd beta = G.ldlt().solve(rhs);
  RadialProfile out = f;
  for (int m = 0; m < n; ++m) out = out - (beta(m) / nrm[m]) * basis.LkPhi[m];
  return out;
}

double projection_residual(const RadialProfile& f, const PhiBasis& basis, int m_max) {
  double nf = norm(f), worst = 0.0;
  for (int m = 0; m <= m_max; ++m)
    worst = std::max(worst, std::abs(inner(f, basis.LkPhi[m])) / (nf * norm(basis.LkPhi[m])));
  return worst;
}

namespace {

double weighted(const RadialProfile& f, const std::function<double(double)>& w) {
  auto g = map_values(f, [&](double y, double v) { return v * v * w(y); });
  return integrate_total(g, 6);
}

}  // namespace

double coercivity_ratio(const LinearizedContext& c, const CoercivityOptions& o, const RadialProfile& f) {
  double i2 = 2.0 * o.i;
  switch (o.op) {
    case CoerOp::Astar: {
      auto w = [&](double y) { return 1.0 / (std::pow(y, i2) * (1 + std::pow(y, 2 * o.alpha))); };
      double lhs = weighted(apply_Astar(c, f), w);
      double rhs = weighted(differentiate(f, 1), w) + weighted(f, [&](double y) { return w(y) / (y * y); });
      return lhs / rhs;
    }
    case CoerOp::L: {
      double k2 = 2.0 * o.k;
      auto w0 = [&](double y) { return 1.0 / (std::pow(y, i2) * (1 + std::pow(y, k2))); };
      auto w1 = [&](double y) { return 1.0 / (std::pow(y, i2) * (1 + std::pow(y, k2 + 2))); };
      double lhs = weighted(apply_L(c, f), w0);
      double rhs = weighted(differentiate(f, 2), w0) + weighted(differentiate(f, 1), w1) +
                   weighted(f, [&](double y) { return w1(y) / (y * y); });
      return lhs / rhs;
    }
    case CoerOp::Lk: {
      int k = o.k;
      auto fs = adapted_derivatives(c, f, 2 * k + 2);  // fs[2m] = L^m f, fs[2m+1] = A L^m f
      double lhs = weighted(fs[2 * k + 2], [](double) { return 1.0; });
      double rhs = weighted(fs[2 * k + 1], [](double y) { return 1.0 / (y * y); });
      for (int m = 0; m <= k; ++m)
        rhs += weighted(fs[2 * m], [&](double y) { return 1.0 / (std::pow(y, 4) * (1 + std::pow(y, 4.0 * (k - m)))); });
      for (int m = 0; m < k; ++m)
        rhs += weighted(fs[2 * m + 1],
                        [&](double y) { return 1.0 / (std::pow(y, 6) * (1 + std::pow(y, 4.0 * (k - m - 1)))); });
      return lhs / rhs;
    }
  }
  return 0.0;
}

ProbeReport coercivity_probe(const LinearizedContext& c, const PhiBasis& basis, const CoercivityOptions& o) {
  ProbeReport r;
  const char* names[] = {"coercivity_Astar", "coercivity_L", "coercivity_Lk"};
  r.id = std::string(names[static_cast<int>(o.op)]) + "_k" + std::to_string(o.k) + "_i" + std::to_string(o.i);
  r.samples = o.samples;
  r.min_margin = std::numeric_limits<double>::infinity();
  int m_max = o.op == CoerOp::Lk ? o.k : 0;
  bool project = o.project && o.op != CoerOp::Astar;
  for (int s = 0; s < o.samples; ++s) {
    auto tf = random_test_function(o.seed + s, false);
    auto f = sample_test_function(c.grid, tf);
    if (project) {
      f = project_out(f, basis, m_max);
      r.projection_residual = std::max(r.projection_residual, projection_residual(f, basis, m_max));
    }
    double v = coercivity_ratio(c, o, f);
    r.margins.push_back(v);
    r.min_margin = std::min(r.min_margin, v);
    if (!(v > 0)) r.failures.push_back(o.seed + s);
  }
  return r;
}

}  // namespace blab
