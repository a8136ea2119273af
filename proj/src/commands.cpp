#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "blowup_lab/errors.hpp"
#include "blowup_lab/modulation.hpp"
#include "blowup_lab/pde_sim.hpp"
#include "blowup_lab/verification.hpp"

#ifndef BLOWUP_LAB_VERSION
#define BLOWUP_LAB_VERSION "0.1.0"
#endif

namespace blab {

const char* version_string() { return BLOWUP_LAB_VERSION; }

namespace {

namespace fs = std::filesystem;

template <class T>
T arg(const Json& a, const char* key, T def) {
  if (!a.contains(key) || a[key].is_null()) return def;
  try {
    return a[key].get<T>();
  } catch (const std::exception&) {
    throw Error(ErrorKind::parameter, std::string("bad value for ") + key);
  }
}

struct Out {
  Json report = Json::object();
  Json checks = Json::array();
  Json tables = Json::object();
  Json plots = Json::object();
  Json warnings = Json::array();

  void check(const std::string& name, double value, const std::string& bound, bool pass) {
    checks.push_back({{"name", name}, {"value", value}, {"bound", bound}, {"pass", pass}});
  }
  void leq(const std::string& n, double v, double b) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "<= %g", b);
    check(n, v, buf, v <= b);
  }
  struct Rows {
    Json* tables;
    std::string name;
    void push_back(Json r) { (*tables)[name]["rows"].push_back(std::move(r)); }
  };
  Rows table(const std::string& name, const std::vector<std::string>& cols) {
    tables[name] = {{"columns", cols}, {"rows", Json::array()}};
    return {&tables, name};
  }
};

Json check_json(const Check& c) {
  return {{"name", c.name}, {"value", c.value}, {"bound", c.bound}, {"pass", c.pass}};
}

AcceptanceSettings settings_from(const Json& a) {
  AcceptanceSettings s;
  s.seed = arg<std::uint64_t>(a, "seed", 1);
  s.tol_scale = arg<double>(a, "tol_scale", 1.0);
  s.hardy_samples = arg<int>(a, "hardy_samples", 1000);
  s.coercivity_samples = arg<int>(a, "coercivity_samples", 1000);
  if (!(s.tol_scale > 0)) throw Error(ErrorKind::parameter, "tol_scale must be positive");
  return s;
}

std::string grid_spec(const GridPtr& g) {
  std::ostringstream o;
  o.precision(17);
  o << "log " << g->ymin() << " " << g->ymax() << " " << g->size();
  return o.str();
}

void stationary(const Json& a, Out& o) {
  int d = arg<int>(a, "d", 7);
  if (d < 2) throw Error(ErrorKind::parameter, "d must be at least 2");
  double tol = arg<double>(a, "tol", 1e-10) * arg<double>(a, "tol_scale", 1.0);
  ShootOptions so;
  so.y_max = arg<double>(a, "ymax", 1e4);
  so.rtol = tol;
  so.atol = 1e-2 * tol;
  if (d == 2) so.slope = 2.0;
  if (d == 7 && so.y_max < 2 * so.tail_b)
    throw Error(ErrorKind::parameter, "ymax must reach 2e3 for the tail fit at d = 7");
  auto m = solve_Q(d, so);
  auto rows = o.table("profile", {"y", "Q", "dQ", "LambdaQ"});
  for (int i = 0; i < m.Q.size(); ++i) {
    double y = m.Q.y(i);
    rows.push_back({y, m.Q[i], m.LQ[i] / y, m.LQ[i]});
  }
  auto res = ode_residual(m.Q, m.LQ, d);
  double rmax = 0;
  for (int i = 0; i < res.size(); ++i) rmax = std::max(rmax, std::abs(res[i]));
  o.report["d"] = d;
  o.report["slope_at_origin"] = so.slope;
  o.report["ode_residual_max"] = rmax;
  if (d == 7) {
    o.report["gamma_fit"] = m.gamma_fit;
    o.report["a0"] = m.a0;
    o.report["a1"] = m.a1;
    o.check("a0", m.a0, "> 0", m.a0 > 0);
    o.check("a1", m.a1, "> 0", m.a1 > 0);
    o.check("tail exponent", m.gamma_fit, "2 +- 0.01", std::abs(m.gamma_fit - 2) <= 1e-2);
  }
  if (d == 2) {
    double e = 0;
    for (int i = 0; i < m.Q.size(); ++i)
      if (m.Q.y(i) <= 50) e = std::max(e, std::abs(m.Q[i] - 2 * std::atan(m.Q.y(i))));
    o.report["closed_form"] = "2 arctan y";
    o.report["closed_form_max_error"] = e;
    o.leq("max |Q - 2 arctan y| on [0, 50]", e, 1e-6);
  }
  if (auto path = arg<std::string>(a, "cache_out", ""); !path.empty()) {
    CacheHeader h;
    h.grid_spec = grid_spec(m.Q.grid);
    h.d = d;
    h.provenance = std::string("blowup_lab ") + version_string() + " stationary";
    h.tolerances = "rtol " + std::to_string(so.rtol) + " atol " + std::to_string(so.atol);
    h.params = Json{{"layout", "y, Q, LambdaQ"}, {"slope", so.slope}}.dump();
    std::vector<double> data(m.Q.grid->y);
    data.insert(data.end(), m.Q.v.begin(), m.Q.v.end());
    data.insert(data.end(), m.LQ.v.begin(), m.LQ.v.end());
    write_profile_cache(path, h, data);
    o.report["cache_out"] = path;
  }
}

std::vector<std::string> string_list(const Json& a, const char* key, std::vector<std::string> def) {
  if (!a.contains(key) || a[key].is_null()) return def;
  if (a[key].is_string()) return {a[key].get<std::string>()};
  return arg<std::vector<std::string>>(a, key, def);
}

void linop(const Json& a, Out& o) {
  Workbench wb(settings_from(a));
  const auto& c = *wb.context();
  if (auto what = arg<std::string>(a, "dump", ""); !what.empty()) {
    const RadialProfile* p = nullptr;
    if (what == "V") p = &c.V;
    else if (what == "Z") p = &c.Z;
    else if (what == "Gamma") p = &c.Gamma;
    else throw Error(ErrorKind::parameter, "dump must be V, Z or Gamma");
    auto rows = o.table(what, {"y", what});
    for (int i = 0; i < p->size(); ++i) rows.push_back({p->y(i), (*p)[i]});
  }
  auto checks = string_list(a, "check", {"kernel", "wronskian", "adjoint", "leibniz"});
  std::uint64_t seed = wb.settings().seed;
  for (const auto& ch : checks) {
    if (ch == "kernel") {
      o.leq("kernel: max y^2 |L(LQ)| / max |LQ|", kernel_residual(c), 1e-8);
    } else if (ch == "wronskian") {
      o.leq("wronskian: relative error on [0.1, 100]", wronskian_error(c), 1e-6);
    } else if (ch == "adjoint") {
      auto f = sample_test_function(c.grid, random_test_function(seed, false));
      auto g = sample_test_function(c.grid, random_test_function(seed + 1, false));
      o.leq("adjoint: <A f, g> against <f, A* g>", adjoint_error(c, f, g), 1e-7);
      o.leq("adjoint: L against A* A", composition_error(c, f), 1e-6);
    } else if (ch == "leibniz") {
      for (int k = 0; k <= 1; ++k) o.leq("leibniz: k = " + std::to_string(k), leibniz_probe(k), 1e-5);
    } else {
      throw Error(ErrorKind::parameter, "unknown check " + ch);
    }
  }
  o.report["a0"] = c.a0;
  o.report["a1"] = c.a1;
}

void profiles(const Json& a, Out& o) {
  Workbench wb(settings_from(a));
  int L = arg<int>(a, "L", 2);
  auto b1s = arg<std::vector<double>>(a, "b1_list", {1e-2, 1e-3, 1e-4});
  const double eta = 3.0 / (4 * L);
  auto fam = build_family(wb.context(), L, 4);
  int tmax = static_cast<int>(fam.T.size()) - 1;
  std::string spec = grid_spec(fam.ctx->grid);
  Json key = {{"L", L}, {"t_max", tmax}, {"version", version_string()}};

  if (auto in = arg<std::string>(a, "cache_in", ""); !in.empty()) {
    CacheHeader h;
    std::vector<double> data;
    size_t n = fam.ctx->grid->y.size();
    if (!read_profile_cache(in, h, data)) {
      o.warnings.push_back("cache " + in + " unreadable or corrupted; profiles recomputed");
      o.report["cache_in"] = "recomputed";
    } else if (h.grid_spec != spec || h.d != 7 || h.params != key.dump() || data.size() != n * (tmax + 1)) {
      o.warnings.push_back("cache " + in + " does not match this configuration; profiles recomputed");
      o.report["cache_in"] = "recomputed";
    } else {
      double dev = 0;
      for (int k = 0; k <= tmax; ++k)
        for (size_t i = 0; i < n; ++i) {
          double v = fam.T[k][static_cast<int>(i)];
          dev = std::max(dev, std::abs(data[k * n + i] - v) / std::max(1.0, std::abs(v)));
        }
      o.report["cache_in"] = "hit";
      o.report["cache_max_deviation"] = dev;
    }
  }
  if (auto out = arg<std::string>(a, "cache_out", ""); !out.empty()) {
    CacheHeader h;
    h.grid_spec = spec;
    h.d = 7;
    h.provenance = std::string("blowup_lab ") + version_string() + " profiles";
    h.tolerances = "inherits stationary defaults";
    h.params = key.dump();
    std::vector<double> data;
    for (int k = 0; k <= tmax; ++k) data.insert(data.end(), fam.T[k].v.begin(), fam.T[k].v.end());
    write_profile_cache(out, h, data);
    o.report["cache_out"] = out;
  }

  bool report = arg<bool>(a, "report", true);
  auto adm = o.table("admissibility", {"profile", "b1", "p1", "p2", "origin_power", "odd_parity", "tail_slope_0",
                                        "tail_slope_1", "tail_slope_2", "ok"});
  auto add = [&](const std::string& name, double b1, const RadialProfile& f, int p) {
    auto r = check_admissible(f, p, p);
    adm.push_back({name, b1, p, p, r.origin_power, r.odd_parity, r.tail_slopes[0], r.tail_slopes[1],
                   r.tail_slopes[2], r.ok});
    return r.ok;
  };
  for (int k = 1; k <= tmax; ++k) {
    bool ok = add("T" + std::to_string(k), 0.0, fam.T[k], k);
    o.check("T" + std::to_string(k) + " admissible", ok ? 1 : 0, "== 1", ok);
  }
  if (!report) return;
  auto sig = o.table("sigma", {"b1", "B0", "B", "C_b1", "C_b1_over_sqrt_b1"});
  auto psi = o.table("psi", {"b1", "B1", "global_m0", "global_m1", "local_m0", "local_m1"});
  std::vector<double> lb, g[2], l[2];
  for (double b1 : b1s) {
    auto sg = build_sigma(fam, b1);
    sig.push_back({b1, sg.k.B0, sg.k.B, sg.k.C_b1, sg.k.C_b1 / std::sqrt(b1)});
    std::vector<double> b{b1};
    for (int k = 2; k <= L; ++k) b.push_back(0.3 * std::pow(b1, k + 0.5));
    auto S = build_S(fam, sg, b);
    for (int k = 2; k <= L + 2; ++k) add("S" + std::to_string(k), b1, S.S[k], k);
    auto P = residual_Psi(fam, sg, S);
    double B1 = B1_of(sg.k, eta);
    double v[4] = {weighted_norm2(P.Psi, 4, B1), weighted_norm2(P.Psi, 8, B1),
                   weighted_norm2(P.Psi, 4, sg.k.B0 / 2), weighted_norm2(P.Psi, 8, sg.k.B0 / 2)};
    psi.push_back({b1, B1, v[0], v[1], v[2], v[3]});
    lb.push_back(std::log(b1));
    for (int m = 0; m < 2; ++m) {
      g[m].push_back(std::log(v[m]));
      l[m].push_back(std::log(v[2 + m]));
    }
  }
  if (lb.size() >= 2) {
    auto fit = [&](const std::vector<double>& y) {
      double n = static_cast<double>(lb.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (size_t i = 0; i < lb.size(); ++i) {
        sx += lb[i]; sy += y[i]; sxx += lb[i] * lb[i]; sxy += lb[i] * y[i];
      }
      return (n * sxy - sx * sy) / (n * sxx - sx * sx);
    };
    Json sl = Json::array();
    for (int m = 0; m < 2; ++m) {
      double tg = 2.0 * (m + 1) + 1 - eta / 2, tl = 2.0 * (m + 1) + 2.5;
      sl.push_back({{"m", m}, {"global_slope", fit(g[m])}, {"global_target", tg},
                    {"local_slope", fit(l[m])}, {"local_target", tl}});
    }
    o.report["psi_scaling"] = sl;
    o.report["eta"] = eta;
    o.report["b_k_seed"] = "b_k = 0.3 b1^(k + 1/2) for k >= 2";
  }
}

void modulation(const Json& a, Out& o) {
  int L = arg<int>(a, "L", 2);
  if (L < 1 || L > 3) throw Error(ErrorKind::parameter, "L must be 1, 2 or 3");
  auto law = arg<std::string>(a, "c", "model");
  double s0 = arg<double>(a, "s0", 100.0), s_end = arg<double>(a, "s_end", 1e9);
  if (!(s0 > 0) || !(s_end > s0)) throw Error(ErrorKind::parameter, "need 0 < s0 < s_end");
  Workbench wb(settings_from(a));
  const auto& fam = wb.family();
  CLaw C;
  if (law == "model") {
    double c = sigma_constants(fam, 1e-3).C_b1 / std::sqrt(1e-3);
    C = c_model(c);
    o.report["c_model"] = c;
  } else if (law == "integral") {
    C = c_integral(fam);
  } else {
    throw Error(ErrorKind::parameter, "c must be model or integral");
  }
  IntegrateOptions io;
  io.rtol *= wb.settings().tol_scale;
  auto tr = integrate_modulation(default_initial_state(L, s0), s_end, C, io);
  auto bt = blowup_time(tr);
  std::vector<std::string> cols{"s", "t", "log_T_minus_t"};
  for (int k = 1; k <= L; ++k) cols.push_back("b" + std::to_string(k));
  cols.push_back("lambda");
  auto rows = o.table("trajectory", cols);
  for (size_t i = 0; i < tr.size(); ++i) {
    Json r = {tr[i].s, tr[i].t, bt.log_remaining[i]};
    for (double b : tr[i].b) r.push_back(b);
    r.push_back(tr[i].lambda());
    rows.push_back(r);
  }
  double eta = 3.0 / (4 * L);
  o.report["L"] = L;
  o.report["c"] = law;
  o.report["kappa"] = bt.fit.kappa;
  o.report["log_lambda_fit_residual"] = bt.fit.rel_residual;
  auto fr = fit_log_lambda(tr, s_end / 10, s_end, true);
  o.report["free_exponent"] = fr.exponent;
  o.report["T"] = bt.T;
  o.report["T_tail_uncertainty"] = bt.tail_error;
  o.report["bootstrap_ratio"] = bootstrap_ratio(tr, eta);
  o.check("bootstrap |b_k| <= 10 b1^(k + 1/2 + eta/10)", o.report["bootstrap_ratio"], "<= 10",
          o.report["bootstrap_ratio"].get<double>() <= 10);
  o.leq("log lambda vs s^(1/3) fit residual", bt.fit.rel_residual, 1e-2);
  if (s_end / 100 >= s0) {
    auto rr = rate_diagnostics(tr, bt);
    o.report["rate_slope"] = rr.slope;
    o.report["rate_slope_residual"] = rr.slope_residual;
    o.report["rate_R_variation"] = rr.R_variation;
    o.report["rate_window"] = {rr.s_lo, rr.s_hi};
    o.check("rate slope", rr.slope, "-1 +- 0.05", std::abs(rr.slope + 1) <= 5e-2);
    o.leq("variation of lambda |log(T-t)| / sqrt(T-t)", rr.R_variation, 0.1);
  }
  if (s0 <= 1e4 && s_end >= 1e6) {
    double lo = 0, hi = 0;
    for (auto& x : tr) {
      if (x.s >= 1e4 && lo == 0) lo = x.b[0] * std::pow(x.s, 2.0 / 3);
      if (x.s <= 1e6) hi = x.b[0] * std::pow(x.s, 2.0 / 3);
    }
    o.report["b1_s23_drift"] = hi / lo - 1;
    o.leq("b1 s^(2/3) drift on [1e4, 1e6]", std::abs(hi / lo - 1), 1e-2);
  }
}

void simulate(const Json& a, Out& o) {
  SimParams p;
  p.d = arg<int>(a, "d", 7);
  if (p.d < 2 || p.d > 12) throw Error(ErrorKind::parameter, "d must be an integer in [2, 12]");
  double A = arg<double>(a, "amplitude", 1.5);
  p.n = arg<int>(a, "n", 1000);
  p.y_max = arg<double>(a, "ymax", 1e3);
  p.stop_lambda = arg<double>(a, "stop_lambda", 1e-8);
  p.snapshot_every = arg<int>(a, "snapshot_every", 0);
  if (p.n < 50 || !(p.y_max > 1) || !(p.stop_lambda > 0) || p.snapshot_every < 0)
    throw Error(ErrorKind::parameter, "invalid simulation parameters");
  auto run = run_to_blowup(tanh_data(A), p);
  const auto& f = run.fit;
  o.report["d"] = p.d;
  o.report["amplitude"] = A;
  o.report["blew_up"] = run.blew_up;
  o.report["decayed"] = run.decayed;
  o.report["steps"] = run.steps;
  o.report["rescales"] = run.events.size();
  o.report["note"] = run.note;
  auto rows = o.table("lambda", {"t", "T_minus_t", "lambda", "rho"});
  if (run.blew_up) {
    o.report["T"] = f.T;
    o.report["classification"] = type_name(f.type_class);
    o.report["rho_slope"] = f.rho_slope;
    o.report["log_correction_slope"] = f.rate_slope;
    o.report["log_correction_residual"] = f.rate_residual;
    o.report["rho_decreasing"] = f.rho_decreasing;
    o.report["decades"] = f.decades;
    auto rem = remaining_times(f.lambda_series, f.remaining_end);
    Json px = Json::array(), py = Json::array(), lx = Json::array(), ly = Json::array();
    for (size_t i = 0; i < rem.size(); ++i) {
      double rho = f.lambda_series[i].lambda / std::sqrt(rem[i]);
      rows.push_back({f.lambda_series[i].t, rem[i], f.lambda_series[i].lambda, rho});
      px.push_back(rem[i]);
      py.push_back(rho);
      if (rem[i] < 1) {
        lx.push_back(std::log(std::abs(std::log(rem[i]))));
        ly.push_back(std::log(rho));
      }
    }
    o.plots["rho"] = {{"title", "lambda / sqrt(T - t)"}, {"xlabel", "T - t"}, {"ylabel", "rho"},
                      {"logx", true}, {"x", px}, {"y", py}};
    o.plots["log_correction"] = {{"title", "log rho against log|log(T - t)|, fitted slope " +
                                               std::to_string(f.rate_slope)},
                                 {"xlabel", "log|log(T - t)|"}, {"ylabel", "log rho"}, {"logx", false},
                                 {"x", lx}, {"y", ly}};
  } else {
    for (const auto& s : f.lambda_series) rows.push_back({s.t, nullptr, s.lambda, nullptr});
  }
  if (!run.snapshots.empty()) {
    auto sn = o.table("snapshots", {"index", "t", "s", "scale", "lambda_est"});
    auto pr = o.table("snapshot_profiles", {"index", "r", "u"});
    for (size_t k = 0; k < run.snapshots.size(); ++k) {
      const auto& s = run.snapshots[k];
      sn.push_back({k, s.t, s.s, s.scale, s.lambda_est});
      for (size_t i = 0; i < s.y.size(); i += 10) pr.push_back({k, s.scale * s.y[i], s.u[i]});
    }
  }
}

void verify(const Json& a, Out& o) {
  auto suite = arg<std::string>(a, "suite", "all");
  if (suite != "hardy" && suite != "coercivity" && suite != "operator-identities" && suite != "all")
    throw Error(ErrorKind::parameter, "suite must be hardy, coercivity, operator-identities or all");
  AcceptanceSettings st = settings_from(a);
  int samples = arg<int>(a, "samples", 1000);
  if (samples < 1) throw Error(ErrorKind::parameter, "samples must be positive");
  Workbench wb(st);
  auto margins = o.table("margins", {"probe", "seed", "margin"});
  Json probes = Json::array();
  auto record = [&](const ProbeReport& r, bool hardy) {
    for (size_t k = 0; k < r.margins.size(); ++k) margins.push_back({r.id, st.seed + k, r.margins[k]});
    Json fails = Json::array();
    for (size_t k = 0; k < std::min<size_t>(r.failures.size(), 20); ++k) fails.push_back(r.failures[k]);
    probes.push_back({{"id", r.id}, {"samples", r.samples}, {"min_margin", r.min_margin},
                      {"failures", r.failures.size()}, {"failing_seeds", fails},
                      {"projection_residual", r.projection_residual}});
    o.check(r.id + " failures", static_cast<double>(r.failures.size()), "== 0", r.failures.empty());
    if (!hardy) o.check(r.id + " constant", r.min_margin, "> 0", r.min_margin > 0);
  };
  if (suite == "hardy" || suite == "all") {
    for (int i = 0; i <= 2; ++i) record(hardy_origin_probe(7, i, samples, st.seed), true);
    for (double al : {1.0, 3.0}) record(hardy_exterior_probe(7, al, samples, st.seed), true);
    record(hardy_critical_probe(7, samples, st.seed), true);
  }
  if (suite == "coercivity" || suite == "all") {
    auto basis = make_phi_basis(wb.family(), 50.0);
    for (auto op : {CoerOp::Astar, CoerOp::L, CoerOp::Lk}) {
      CoercivityOptions co;
      co.op = op;
      co.seed = st.seed;
      co.samples = samples;
      record(coercivity_probe(*wb.context(), basis, co), false);
    }
  }
  if (suite == "operator-identities" || suite == "all") {
    const auto& c = *wb.context();
    auto f = sample_test_function(c.grid, random_test_function(st.seed, false));
    auto g = sample_test_function(c.grid, random_test_function(st.seed + 1, false));
    o.leq("kernel: max y^2 |L(LQ)| / max |LQ|", kernel_residual(c), 1e-8);
    o.leq("wronskian: relative error on [0.1, 100]", wronskian_error(c), 1e-6);
    o.leq("adjoint: <A f, g> against <f, A* g>", adjoint_error(c, f, g), 1e-7);
    o.leq("composition: L against A* A", composition_error(c, f), 1e-6);
    for (int k = 0; k <= 1; ++k) o.leq("leibniz: k = " + std::to_string(k), leibniz_probe(k), 1e-5);
  }
  o.report["suite"] = suite;
  o.report["seed"] = st.seed;
  o.report["samples"] = samples;
  o.report["probes"] = probes;
}

std::vector<std::string> stage_order() {
  return {"stationary", "linearized", "profiles", "modulation", "verification", "pde_sim"};
}

Json criterion_json(const CriterionResult& r) {
  Json checks = Json::array();
  for (const auto& c : r.checks) checks.push_back(check_json(c));
  return {{"id", r.id},           {"stage", criterion_stage(r.id)}, {"pass", r.pass},
          {"seconds", r.seconds}, {"budget_seconds", r.budget},       {"note", r.note},
          {"error", r.error},     {"checks", checks}};
}

void pipeline(const Json& a, Out& o) {
  auto st = settings_from(a);
  auto only = string_list(a, "only", {});
  std::vector<std::string> ids;
  for (const auto& stage : stage_order())
    for (const auto& id : criterion_ids()) {
      if (criterion_stage(id) != stage) continue;
      bool want = only.empty() || std::find(only.begin(), only.end(), id) != only.end() ||
                  std::find(only.begin(), only.end(), stage) != only.end();
      if (want) ids.push_back(id);
    }
  for (const auto& w : only) {
    auto so = stage_order();
    auto all = criterion_ids();
    if (std::find(so.begin(), so.end(), w) == so.end() && std::find(all.begin(), all.end(), w) == all.end())
      throw Error(ErrorKind::parameter, "unknown stage or criterion " + w);
  }
  std::string cache_dir = arg<std::string>(a, "cache_dir", "");
  Json subset = {{"version", version_string()}, {"seed", st.seed}, {"tol_scale", st.tol_scale},
                 {"hardy_samples", st.hardy_samples}, {"coercivity_samples", st.coercivity_samples}};
  std::string key = checksum_hex(subset.dump());
  Workbench wb(st);
  Json matrix = Json::object();
  int computed = 0, cached = 0;
  auto rows = o.table("matrix", {"id", "stage", "pass", "cached", "seconds"});
  for (const auto& id : ids) {
    Json res;
    bool hit = false;
    fs::path file;
    if (!cache_dir.empty()) {
      file = fs::path(cache_dir) / (id + "-" + key + ".json");
      if (fs::exists(file)) {
        std::ifstream is(file);
        std::string sum, body;
        std::getline(is, sum);
        std::getline(is, body, '\0');
        if (!body.empty() && body.back() == '\n') body.pop_back();
        if (sum == checksum_hex(body)) {
          try {
            res = Json::parse(body);
            hit = true;
          } catch (const std::exception&) {
          }
        }
        if (!hit) o.warnings.push_back("cache entry " + file.string() + " is corrupted; " + id + " recomputed");
      }
    }
    if (!hit) {
      res = criterion_json(run_criterion(id, wb));
      ++computed;
      if (!cache_dir.empty()) {
        fs::create_directories(cache_dir);
        std::ofstream os(file);
        std::string body = res.dump();
        os << checksum_hex(body) << "\n" << body << "\n";
        if (!os) throw Error(ErrorKind::io, "cannot write " + file.string());
      }
    } else {
      ++cached;
    }
    res["cached"] = hit;
    rows.push_back({id, res["stage"], res["pass"], hit, res["seconds"]});
    o.check(id, res["pass"].get<bool>() ? 1 : 0, "== 1", res["pass"].get<bool>());
    matrix[id] = res;
  }
  o.report["cache_key"] = key;
  o.report["computed"] = computed;
  o.report["cached"] = cached;
  o.report["criteria"] = matrix;
}

}  // namespace

Json run_command(const std::string& command, const Json& args) {
  if (!args.is_object()) throw Error(ErrorKind::parameter, "arguments must be a JSON object");
  Out o;
  if (command == "stationary") stationary(args, o);
  else if (command == "linop") linop(args, o);
  else if (command == "profiles") profiles(args, o);
  else if (command == "modulation") modulation(args, o);
  else if (command == "simulate") simulate(args, o);
  else if (command == "verify") verify(args, o);
  else if (command == "pipeline") pipeline(args, o);
  else throw Error(ErrorKind::parameter, "unknown command " + command);
  bool ok = std::all_of(o.checks.begin(), o.checks.end(), [](const Json& c) { return c["pass"].get<bool>(); });
  return {{"command", command}, {"version", version_string()}, {"config", args},  {"ok", ok},
          {"report", o.report}, {"checks", o.checks},          {"warnings", o.warnings},
          {"tables", o.tables}, {"plots", o.plots}};
}

}  // namespace blab
