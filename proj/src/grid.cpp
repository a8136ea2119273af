#include "blowup_lab/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <Eigen/Dense>

#include "blowup_lab/errors.hpp"

namespace blab {

const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::parameter: return "parameter error";
    case ErrorKind::singularity: return "singularity error";
    case ErrorKind::convergence: return "convergence error";
    case ErrorKind::domain: return "domain error";
    case ErrorKind::fit: return "fit error";
    case ErrorKind::extraction: return "extraction error";
    case ErrorKind::construction: return "construction error";
    case ErrorKind::unsupported: return "unsupported";
    case ErrorKind::integration: return "integration error";
    case ErrorKind::estimation: return "estimation error";
    case ErrorKind::step: return "step error";
    case ErrorKind::decomposition: return "decomposition error";
    case ErrorKind::energy: return "energy error";
    case ErrorKind::io: return "io error";
  }
  return "error";
}

namespace {

// Fornberg's recursion for derivative weights of order 0..2 at x0
std::array<std::array<double, 5>, 3> fornberg(double x0, const double* x) {
  constexpr int n = 5, m = 2;
  double c[m + 1][n] = {};
  double c1 = 1.0, c4 = x[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    int mn = std::min(i, m);
    double c2 = 1.0, c5 = c4;
    c4 = x[i] - x0;
    for (int j = 0; j < i; ++j) {
      double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  std::array<std::array<double, 5>, 3> w{};
  for (int k = 0; k <= m; ++k)
    for (int j = 0; j < n; ++j) w[k][j] = c[k][j];
  return w;
}

double lagrange(const double* x, int m, double t) {
  double r = 1.0;
  for (int j = 0; j < 4; ++j)
    if (j != m) r *= (t - x[j]) / (x[m] - x[j]);
  return r;
}

void check_same(const RadialProfile& f, const RadialProfile& g) {
  if (f.size() != g.size()) throw Error(ErrorKind::parameter, "profiles live on different grids");
}

std::optional<Series> combine(const RadialProfile& f, const RadialProfile& g,
                              Series (*op)(const Series&, const Series&)) {
  if (f.origin && g.origin) return op(*f.origin, *g.origin);
  return std::nullopt;
}

Series s_add(const Series& a, const Series& b) { return a + b; }
Series s_sub(const Series& a, const Series& b) { return a - b; }
Series s_mul(const Series& a, const Series& b) { return a * b; }
Series s_div(const Series& a, const Series& b) { return divide(a, b); }

}  // namespace

int RadialGrid::index_at_least(double v) const {
  return static_cast<int>(std::lower_bound(y.begin(), y.end(), v) - y.begin());
}

GridPtr make_log_grid(double y_min, double y_max, int n, double cluster_exponent, int d,
                      double series_radius) {
  if (!(y_min > 0.0) || !(y_max > y_min)) throw Error(ErrorKind::parameter, "need 0 < y_min < y_max");
  if (n < 16) throw Error(ErrorKind::parameter, "need at least 16 nodes");
  if (!(cluster_exponent > 0.0)) throw Error(ErrorKind::parameter, "cluster exponent must be positive");
  if (d < 2) throw Error(ErrorKind::parameter, "dimension must be at least 2");
  auto g = std::make_shared<RadialGrid>();
  g->d = d;
  g->y.resize(n);
  double span = std::log(y_max / y_min);
  for (int i = 0; i < n; ++i) {
    double t = std::pow(static_cast<double>(i) / (n - 1), cluster_exponent);
    g->y[i] = y_min * std::exp(span * t);
  }
  g->y.back() = y_max;
  g->series_radius = series_radius >= 0.0 ? series_radius : std::min(1e-3, 10.0 * y_min);

  g->d1.resize(n);
  g->d2.resize(n);
  g->stencil_start.resize(n);
  for (int i = 0; i < n; ++i) {
    int s = std::clamp(i - 2, 0, n - 5);
    auto w = fornberg(g->y[i], &g->y[s]);
    g->stencil_start[i] = s;
    g->d1[i] = w[1];
    g->d2[i] = w[2];
    // zero-sum rows, so differences against the center node are exact for constants
    for (auto* r : {&g->d1[i], &g->d2[i]}) {
      double sum = 0.0;
      for (int j = 0; j < 5; ++j)
        if (j != i - s) sum += (*r)[j];
      (*r)[i - s] = -sum;
    }
  }

  g->cell_w.resize(n - 1);
  g->cell_start.resize(n - 1);
  g->quad_weights.assign(n, 0.0);
  const double gp = 0.5 / std::sqrt(3.0);
  for (int i = 0; i + 1 < n; ++i) {
    int s = std::clamp(i - 1, 0, n - 4);
    double a = g->y[i], b = g->y[i + 1], h = b - a;
    double t0 = a + h * (0.5 - gp), t1 = a + h * (0.5 + gp);
    for (int m = 0; m < 4; ++m) {
      double w = 0.5 * h * (lagrange(&g->y[s], m, t0) + lagrange(&g->y[s], m, t1));
      g->cell_w[i][m] = w;
      g->quad_weights[s + m] += w;
    }
    g->cell_start[i] = s;
  }
  for (int i = 0; i < n; ++i) g->quad_weights[i] *= std::pow(g->y[i], d - 1);
  return g;
}

double RadialProfile::at(double yv) const {
  const auto& y = grid->y;
  int n = size();
  if (yv < y.front()) {
    if (origin) return origin->eval(yv);
    throw Error(ErrorKind::domain, "evaluation below the grid without origin data");
  }
  if (yv > y.back()) {
    if (tail) {
      double r = tail->coefficient * std::pow(yv, tail->exponent);
      for (size_t k = 0; k < tail->corrections.size(); ++k)
        r += tail->corrections[k] * std::pow(yv, tail->exponent - 1.0 - k);
      return r;
    }
    if (yv <= y.back() * (1 + 1e-12)) return v.back();
    throw Error(ErrorKind::domain, "evaluation beyond the grid without a tail model");
  }
  int i = static_cast<int>(std::upper_bound(y.begin(), y.end(), yv) - y.begin()) - 1;
  int s = std::clamp(i - 1, 0, n - 4);
  double x[4], t = std::log(yv);
  for (int m = 0; m < 4; ++m) x[m] = std::log(y[s + m]);
  double r = 0.0;
  for (int m = 0; m < 4; ++m) r += v[s + m] * lagrange(x, m, t);
  return r;
}

RadialProfile sample(GridPtr g, const std::function<double(double)>& f, std::optional<Series> s) {
  std::vector<double> v(g->size());
  for (int i = 0; i < g->size(); ++i) v[i] = f(g->y[i]);
  return {std::move(g), std::move(v), std::move(s)};
}

RadialProfile power_profile(GridPtr g, int k) {
  auto r = sample(g, [k](double y) { return std::pow(y, k); });
  r.origin = Series::monomial(k, 1.0, 16);
  return r;
}

RadialProfile operator+(const RadialProfile& f, const RadialProfile& g) {
  check_same(f, g);
  RadialProfile r(f.grid, f.v, combine(f, g, s_add));
  for (int i = 0; i < r.size(); ++i) r.v[i] += g.v[i];
  return r;
}

RadialProfile operator-(const RadialProfile& f, const RadialProfile& g) {
  check_same(f, g);
  RadialProfile r(f.grid, f.v, combine(f, g, s_sub));
  for (int i = 0; i < r.size(); ++i) r.v[i] -= g.v[i];
  return r;
}

RadialProfile operator*(const RadialProfile& f, const RadialProfile& g) {
  check_same(f, g);
  RadialProfile r(f.grid, f.v, combine(f, g, s_mul));
  for (int i = 0; i < r.size(); ++i) r.v[i] *= g.v[i];
  return r;
}

RadialProfile operator*(double c, const RadialProfile& f) {
  RadialProfile r(f.grid, f.v, f.origin ? std::optional<Series>(c * *f.origin) : std::nullopt);
  for (double& x : r.v) x *= c;
  return r;
}

RadialProfile operator-(const RadialProfile& f) { return -1.0 * f; }

RadialProfile divide(const RadialProfile& f, const RadialProfile& g) {
  check_same(f, g);
  RadialProfile r(f.grid, f.v, combine(f, g, s_div));
  for (int i = 0; i < r.size(); ++i) r.v[i] /= g.v[i];
  return r;
}

RadialProfile shift_power(const RadialProfile& f, int k) {
  RadialProfile r(f.grid, f.v, f.origin ? std::optional<Series>(f.origin->shift(k)) : std::nullopt);
  for (int i = 0; i < r.size(); ++i) r.v[i] *= std::pow(f.y(i), k);
  return r;
}

RadialProfile map_values(const RadialProfile& f, const std::function<double(double, double)>& fn) {
  RadialProfile r(f.grid, f.v);
  for (int i = 0; i < r.size(); ++i) r.v[i] = fn(f.y(i), f.v[i]);
  return r;
}

RadialProfile differentiate(const RadialProfile& f, int order) {
  if (order != 1 && order != 2) throw Error(ErrorKind::parameter, "derivative order must be 1 or 2");
  const RadialGrid& g = *f.grid;
  int n = f.size();
  if (n < 5) throw Error(ErrorKind::parameter, "need at least 5 nodes");
  std::optional<Series> ds;
  if (f.origin) ds = order == 1 ? f.origin->deriv() : f.origin->deriv().deriv();
  RadialProfile r(f.grid, std::vector<double>(n), ds);
  const auto& W = order == 1 ? g.d1 : g.d2;
  for (int i = 0; i < n; ++i) {
    if (ds && g.y[i] <= g.series_radius) {
      r.v[i] = ds->eval(g.y[i]);
      continue;
    }
    int s = g.stencil_start[i];
    double acc = 0.0;
    for (int j = 0; j < 5; ++j) acc += W[i][j] * (f.v[s + j] - f.v[i]);
    r.v[i] = acc;
  }
  return r;
}

RadialProfile lambda_op(const RadialProfile& f) { return shift_power(differentiate(f, 1), 1); }

RadialProfile integrate_cumulative(const RadialProfile& f, int weight_power) {
  const RadialGrid& g = *f.grid;
  int n = f.size();
  std::vector<double> gv(n);
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(f.v[i])) throw Error(ErrorKind::parameter, "non-finite integrand");
    gv[i] = f.v[i] * std::pow(g.y[i], weight_power);
  }
  std::optional<Series> anti;
  double f0 = 0.0;
  if (f.origin) {
    Series s = f.origin->shift(weight_power);
    if (s.leading_power(0.0) <= -1 && s.leading_power(0.0) < s.order())
      throw Error(ErrorKind::singularity, "integrand not integrable at the origin");
    anti = s.antideriv();
    f0 = anti->eval(g.y[0]);
  }
  RadialProfile r(f.grid, std::vector<double>(n), anti);
  r.v[0] = f0;
  for (int i = 0; i + 1 < n; ++i) {
    int s = g.cell_start[i];
    double acc = 0.0;
    for (int m = 0; m < 4; ++m) acc += g.cell_w[i][m] * gv[s + m];
    r.v[i + 1] = r.v[i] + acc;
  }
  return r;
}

double integrate_total(const RadialProfile& f, int weight_power) {
  return integrate_cumulative(f, weight_power).v.back();
}

double inner(const RadialProfile& f, const RadialProfile& g, double y_cut) {
  check_same(f, g);
  const RadialGrid& G = *f.grid;
  if (y_cut < 0.0) {
    double s = 0.0;
    for (int i = 0; i < f.size(); ++i) s += G.quad_weights[i] * f.v[i] * g.v[i];
    return s;
  }
  auto h = f * g;
  h.origin.reset();
  auto c = integrate_cumulative(h, G.d - 1);
  return c.at(std::min(y_cut, G.ymax()));
}

double norm(const RadialProfile& f, double y_cut) { return std::sqrt(std::max(inner(f, f, y_cut), 0.0)); }

TailFit fit_tail(const RadialProfile& f, double y_a, double y_b) {
  const auto& y = f.grid->y;
  int i0 = f.grid->index_at_least(y_a), i1 = f.grid->index_at_least(y_b);
  if (i1 >= f.size()) i1 = f.size() - 1;
  if (i1 - i0 + 1 < 10) throw Error(ErrorKind::parameter, "tail window needs at least 10 nodes");
  TailFit r;
  double sgn = f.v[i0] >= 0 ? 1.0 : -1.0;
  for (int i = i0; i <= i1; ++i)
    if (f.v[i] * sgn <= 0.0) r.sign_change = true;
  if (r.sign_change) {
    r.coefficient = r.exponent = r.fit_error = std::nan("");
    return r;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = i1 - i0 + 1;
  for (int i = i0; i <= i1; ++i) {
    double lx = std::log(y[i]), ly = std::log(std::abs(f.v[i]));
    sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
  }
  double den = m * sxx - sx * sx;
  r.exponent = (m * sxy - sx * sy) / den;
  double c = (sy - r.exponent * sx) / m;
  r.coefficient = sgn * std::exp(c);
  double ss = 0.0;
  for (int i = i0; i <= i1; ++i) {
    double e = std::log(std::abs(f.v[i])) - c - r.exponent * std::log(y[i]);
    ss += e * e;
  }
  r.fit_error = std::sqrt(ss / m);
  return r;
}

std::vector<double> fit_powers(const RadialProfile& f, double y_a, double y_b,
                               const std::vector<double>& powers) {
  const auto& y = f.grid->y;
  int i0 = f.grid->index_at_least(y_a), i1 = std::min(f.grid->index_at_least(y_b), f.size() - 1);
  int m = i1 - i0 + 1, k = static_cast<int>(powers.size());
  if (m < k + 2) throw Error(ErrorKind::parameter, "window too small for the power fit");
  // rows scaled by the leading power so every node carries comparable weight
  Eigen::MatrixXd A(m, k);
  Eigen::VectorXd b(m);
  for (int i = 0; i < m; ++i) {
    double yy = y[i0 + i], sc = std::pow(yy, -powers[0]);
    for (int j = 0; j < k; ++j) A(i, j) = std::pow(yy, powers[j]) * sc;
    b(i) = f.v[i0 + i] * sc;
  }
  Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
  return {c.data(), c.data() + k};
}

double loglog_slope(const RadialProfile& f, double y_a, double y_b) {
  const auto& y = f.grid->y;
  int i0 = f.grid->index_at_least(y_a), i1 = std::min(f.grid->index_at_least(y_b), f.size() - 1);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (int i = i0; i <= i1; ++i) {
    if (f.v[i] == 0.0) continue;
    double lx = std::log(y[i]), ly = std::log(std::abs(f.v[i]));
    sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    ++m;
  }
  if (m < 2) return std::nan("");
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

std::string checksum_hex(const std::vector<double>& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (double x : data) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffu;
      h *= 1099511628211ull;
    }
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

void write_profile_cache(const std::string& path, const CacheHeader& h, const std::vector<double>& data) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::io, "cannot write " + path);
  os << "format: blowup-lab-profile 1\n"
     << "grid: " << h.grid_spec << "\n"
     << "d: " << h.d << "\n"
     << "provenance: " << h.provenance << "\n"
     << "tolerances: " << h.tolerances << "\n"
     << "params: " << h.params << "\n"
     << "length: " << data.size() << "\n"
     << "checksum: " << checksum_hex(data) << "\n"
     << "---\n";
  for (double x : data) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
    char b[8];
    for (int k = 0; k < 8; ++k) b[k] = static_cast<char>((bits >> (8 * k)) & 0xffu);
    os.write(b, 8);
  }
}

std::string checksum_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

bool read_profile_cache(const std::string& path, CacheHeader& h, std::vector<double>& data) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return false;
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(is, line)) {
    if (line == "---") break;
    auto c = line.find(": ");
    if (c == std::string::npos) return false;
    kv[line.substr(0, c)] = line.substr(c + 2);
  }
  if (line != "---" || kv["format"] != "blowup-lab-profile 1") return false;
  try {
    size_t len = std::stoull(kv.at("length"));
    data.resize(len);
    for (size_t i = 0; i < len; ++i) {
      unsigned char b[8];
      if (!is.read(reinterpret_cast<char*>(b), 8)) return false;
      std::uint64_t bits = 0;
      for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(b[k]) << (8 * k);
      data[i] = std::bit_cast<double>(bits);
    }
    if (checksum_hex(data) != kv.at("checksum")) return false;
    h.grid_spec = kv.at("grid");
    h.d = std::stoi(kv.at("d"));
    h.provenance = kv.at("provenance");
    h.tolerances = kv.at("tolerances");
    h.params = kv.at("params");
  } catch (const std::exception&) {
    return false;
  }
  return true;
}

}  // namespace blab
