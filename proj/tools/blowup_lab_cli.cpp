#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "blowup_lab/c_api.h"
#include "json.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

constexpr int kOk = 0, kFail = 1, kUsage = 2;

std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

Json parse_value(const std::string& v) {
  try {
    return Json::parse(v);
  } catch (const std::exception&) {
    return v;
  }
}

// key = value lines; "command.key" applies to one subcommand only
Json read_config(const std::string& path, const std::string& command) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read config " + path);
  Json global = Json::object(), scoped = Json::object();
  std::string line;
  int no = 0;
  while (std::getline(is, line)) {
    ++no;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    line = trim(line);
    if (line.empty()) continue;
    auto p = line.find_first_of("=:");
    if (p == std::string::npos) throw std::runtime_error(path + ":" + std::to_string(no) + ": expected key = value");
    std::string key = trim(line.substr(0, p));
    for (auto& ch : key)
      if (ch == '-') ch = '_';
    Json val = parse_value(trim(line.substr(p + 1)));
    if (auto dot = key.find('.'); dot != std::string::npos) {
      if (key.substr(0, dot) == command) scoped[key.substr(dot + 1)] = val;
    } else {
      global[key] = val;
    }
  }
  global.update(scoped);
  return global;
}

std::string header_lines(const Json& res) {
  return "# version: " + res["version"].get<std::string>() + "\n# config: " + res["config"].dump() + "\n";
}

std::string cell(const Json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  if (v.is_number_float()) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
    return buf;
  }
  return v.dump();
}

void write_csv(const fs::path& path, const Json& res, const Json& table) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << header_lines(res);
  const auto& cols = table["columns"];
  for (size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i].get<std::string>();
  os << "\n";
  for (const auto& row : table["rows"]) {
    for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell(row[i]);
    os << "\n";
  }
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

void write_svg(const fs::path& path, const Json& res, const Json& plot) {
  const double W = 640, H = 420, l = 70, r = 20, t = 40, b = 50;
  bool logx = plot.value("logx", false);
  std::vector<double> xs, ys;
  for (size_t i = 0; i < plot["x"].size(); ++i) {
    double x = plot["x"][i].get<double>(), y = plot["y"][i].get<double>();
    if (logx) {
      if (!(x > 0)) continue;
      x = std::log10(x);
    }
    if (std::isfinite(x) && std::isfinite(y)) {
      xs.push_back(x);
      ys.push_back(y);
    }
  }
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<metadata><![CDATA[\n" << header_lines(res) << "]]></metadata>\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
     << plot["title"].get<std::string>() << "</text>\n";
  os << "<rect x=\"" << l << "\" y=\"" << t << "\" width=\"" << W - l - r << "\" height=\"" << H - t - b
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  if (!xs.empty()) {
    auto [x0, x1] = std::minmax_element(xs.begin(), xs.end());
    auto [y0, y1] = std::minmax_element(ys.begin(), ys.end());
    double xa = *x0, xb = *x1 > *x0 ? *x1 : *x0 + 1, ya = *y0, yb = *y1 > *y0 ? *y1 : *y0 + 1;
    auto px = [&](double x) { return l + (x - xa) / (xb - xa) * (W - l - r); };
    auto py = [&](double y) { return H - b - (y - ya) / (yb - ya) * (H - t - b); };
    os << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < xs.size(); ++i) os << px(xs[i]) << "," << py(ys[i]) << " ";
    os << "\"/>\n";
    auto xl = [&](double x) { return logx ? "1e" + num(x) : num(x); };
    os << "<text x=\"" << l << "\" y=\"" << H - b + 16 << "\" font-size=\"11\">" << xl(xa) << "</text>\n";
    os << "<text x=\"" << W - r << "\" y=\"" << H - b + 16 << "\" font-size=\"11\" text-anchor=\"end\">" << xl(xb)
       << "</text>\n";
    os << "<text x=\"" << l - 4 << "\" y=\"" << H - b << "\" font-size=\"11\" text-anchor=\"end\">" << num(ya)
       << "</text>\n";
    os << "<text x=\"" << l - 4 << "\" y=\"" << t + 10 << "\" font-size=\"11\" text-anchor=\"end\">" << num(yb)
       << "</text>\n";
  }
  os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
     << plot["xlabel"].get<std::string>() << (logx ? " (log scale)" : "") << "</text>\n";
  os << "<text x=\"16\" y=\"" << H / 2 << "\" font-size=\"12\" transform=\"rotate(-90 16 " << H / 2
     << ")\" text-anchor=\"middle\">" << plot["ylabel"].get<std::string>() << "</text>\n";
  os << "</svg>\n";
}

struct Paths {
  std::string csv_out, svg_out, report_out;
};

fs::path with_suffix(const fs::path& base, const std::string& name, const std::string& ext) {
  return base.parent_path() / (base.stem().string() + "_" + name + ext);
}

void emit(const Json& res, const std::string& command, const fs::path& out_dir, const Paths& p) {
  fs::create_directories(out_dir);
  Json report = res;
  report.erase("tables");
  report.erase("plots");
  fs::path rep = p.report_out.empty() ? out_dir / (command + "_report.json") : fs::path(p.report_out);
  if (rep.has_parent_path()) fs::create_directories(rep.parent_path());
  {
    std::ofstream os(rep);
    if (!os) throw std::runtime_error("cannot write " + rep.string());
    os << report.dump(1) << "\n";
  }
  std::vector<fs::path> written{rep};
  // the first table is the main series
  bool first = true;
  for (const auto& [name, table] : res["tables"].items()) {
    fs::path f;
    if (first && !p.csv_out.empty()) f = p.csv_out;
    else if (!p.csv_out.empty()) f = with_suffix(p.csv_out, name, ".csv");
    else if (!p.report_out.empty()) f = with_suffix(p.report_out, name, ".csv");
    else f = out_dir / (command + "_" + name + ".csv");
    if (f.has_parent_path()) fs::create_directories(f.parent_path());
    write_csv(f, res, table);
    written.push_back(f);
    first = false;
  }
  if (!p.svg_out.empty()) {
    first = true;
    for (const auto& [name, plot] : res["plots"].items()) {
      fs::path f = first ? fs::path(p.svg_out) : with_suffix(p.svg_out, name, ".svg");
      if (f.has_parent_path()) fs::create_directories(f.parent_path());
      write_svg(f, res, plot);
      written.push_back(f);
      first = false;
    }
  }
  for (const auto& f : written) std::cerr << "wrote " << f.string() << "\n";
}

void summarize(const Json& res) {
  for (const auto& w : res["warnings"]) std::cerr << "warning: " << w.get<std::string>() << "\n";
  for (const auto& c : res["checks"])
    std::cout << (c["pass"].get<bool>() ? "PASS " : "FAIL ") << c["name"].get<std::string>() << " = "
              << cell(c["value"]) << " (" << c["bound"].get<std::string>() << ")\n";
  std::cout << res["command"].get<std::string>() << ": " << (res["ok"].get<bool>() ? "ok" : "checks failed") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for corotational harmonic map heat flow blowup"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(blab_version()));

  std::string config_path, cache_dir, out_dir = "out";
  int jobs = 1;
  std::uint64_t seed = 1;
  double tol_scale = 1.0;
  app.add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--cache-dir", cache_dir, "cache directory (BLOWUP_LAB_CACHE overrides)");
  app.add_option("--out-dir", out_dir, "directory for reports and series")->capture_default_str();
  app.add_option("--jobs", jobs, "parallelism width")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "random seed");
  app.add_option("--tol-scale", tol_scale, "multiplier on solver tolerances")->check(CLI::PositiveNumber);

  Json args = Json::object();
  Paths paths;
  auto opt = [&](CLI::App* sub, const std::string& flag, auto& var, const std::string& help) {
    return sub->add_option(flag, var, help);
  };

  auto* st = app.add_subcommand("stationary", "ground state Q by shooting");
  int st_d = 7;
  double st_ymax = 1e4, st_tol = 1e-10;
  std::string st_cache;
  opt(st, "--d", st_d, "dimension")->check(CLI::Range(2, 64));
  opt(st, "--ymax", st_ymax, "outer radius");
  opt(st, "--tol", st_tol, "relative integration tolerance");
  opt(st, "--cache-out", st_cache, "profile cache file to write");

  auto* lo = app.add_subcommand("linop", "linearized operator dumps and identity checks");
  std::string lo_dump;
  std::vector<std::string> lo_check;
  opt(lo, "--dump", lo_dump, "profile to dump")->check(CLI::IsMember({"V", "Z", "Gamma"}));
  opt(lo, "--check", lo_check, "identity checks")
      ->check(CLI::IsMember({"kernel", "wronskian", "adjoint", "leibniz"}))
      ->delimiter(',');

  auto* pr = app.add_subcommand("profiles", "T_k, Sigma, S_k hierarchy and residual reports");
  int pr_L = 2;
  std::vector<double> pr_b1;
  std::string pr_in, pr_out;
  bool pr_report = false;
  opt(pr, "--L", pr_L, "truncation order")->check(CLI::Range(1, 3));
  opt(pr, "--b1-list", pr_b1, "comma separated b1 values")->delimiter(',');
  opt(pr, "--cache-in", pr_in, "profile cache to reuse");
  opt(pr, "--cache-out", pr_out, "profile cache to write");
  pr->add_flag("--report", pr_report, "emit Sigma, S_k and Psi_b reports");

  auto* mo = app.add_subcommand("modulation", "finite-dimensional modulation dynamics");
  int mo_L = 2;
  std::string mo_c = "model";
  double mo_s0 = 100, mo_send = 1e9;
  opt(mo, "--L", mo_L, "truncation order")->check(CLI::Range(1, 3));
  opt(mo, "--c", mo_c, "C_b1 law")->check(CLI::IsMember({"model", "integral"}));
  opt(mo, "--s0", mo_s0, "initial renormalized time");
  opt(mo, "--s-end", mo_send, "final renormalized time");
  opt(mo, "--csv-out", paths.csv_out, "trajectory CSV");

  auto* si = app.add_subcommand("simulate", "radial PDE run to blowup");
  int si_d = 7, si_n = 1000, si_snap = 0;
  double si_A = 1.5, si_ymax = 1e3, si_stop = 1e-8;
  opt(si, "--d", si_d, "integer dimension");
  opt(si, "--amplitude", si_A, "A in u0 = A (pi/2) tanh r");
  opt(si, "--n", si_n, "grid intervals");
  opt(si, "--ymax", si_ymax, "outer radius of the reference grid");
  opt(si, "--stop-lambda", si_stop, "stop once lambda falls below this");
  opt(si, "--snapshot-every", si_snap, "steps between snapshots, 0 for none");
  opt(si, "--csv-out", paths.csv_out, "lambda(t) CSV");
  opt(si, "--svg-out", paths.svg_out, "plot of lambda / sqrt(T - t)");

  auto* ve = app.add_subcommand("verify", "Hardy, coercivity and operator identity probes");
  std::string ve_suite = "all";
  int ve_samples = 1000;
  opt(ve, "--suite", ve_suite, "probe suite")->check(CLI::IsMember({"hardy", "coercivity", "operator-identities", "all"}));
  opt(ve, "--samples", ve_samples, "samples per probe")->check(CLI::PositiveNumber);
  opt(ve, "--report-out", paths.report_out, "report path");

  auto* pi = app.add_subcommand("pipeline", "acceptance criteria in dependency order");
  std::vector<std::string> pi_only;
  opt(pi, "--only", pi_only, "stages or criterion ids")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  std::string command = sub->get_name();
  try {
    if (!config_path.empty()) args = read_config(config_path, command);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  }
  auto given = [&](CLI::App* a, const std::string& flag) { return a->count(flag) > 0; };
  auto set = [&](CLI::App* a, const std::string& flag, const std::string& key, const Json& v) {
    if (given(a, flag)) args[key] = v;
  };
  set(&app, "--seed", "seed", seed);
  set(&app, "--tol-scale", "tol_scale", tol_scale);
  set(&app, "--jobs", "jobs", jobs);
  if (given(&app, "--cache-dir")) args["cache_dir"] = cache_dir;
  if (given(&app, "--out-dir") || !args.contains("out_dir")) args["out_dir"] = out_dir;
  if (const char* env = std::getenv("BLOWUP_LAB_CACHE"); env && *env) args["cache_dir"] = env;
  if (!args.contains("cache_dir")) args["cache_dir"] = (fs::path(args["out_dir"].get<std::string>()) / "cache").string();

  if (sub == st) {
    set(st, "--d", "d", st_d);
    set(st, "--ymax", "ymax", st_ymax);
    set(st, "--tol", "tol", st_tol);
    set(st, "--cache-out", "cache_out", st_cache);
  } else if (sub == lo) {
    set(lo, "--dump", "dump", lo_dump);
    set(lo, "--check", "check", lo_check);
  } else if (sub == pr) {
    set(pr, "--L", "L", pr_L);
    set(pr, "--b1-list", "b1_list", pr_b1);
    set(pr, "--cache-in", "cache_in", pr_in);
    set(pr, "--cache-out", "cache_out", pr_out);
    if (!args.contains("report")) args["report"] = pr_report;
    if (given(pr, "--report")) args["report"] = true;
  } else if (sub == mo) {
    set(mo, "--L", "L", mo_L);
    set(mo, "--c", "c", mo_c);
    set(mo, "--s0", "s0", mo_s0);
    set(mo, "--s-end", "s_end", mo_send);
  } else if (sub == si) {
    set(si, "--d", "d", si_d);
    set(si, "--amplitude", "amplitude", si_A);
    set(si, "--n", "n", si_n);
    set(si, "--ymax", "ymax", si_ymax);
    set(si, "--stop-lambda", "stop_lambda", si_stop);
    set(si, "--snapshot-every", "snapshot_every", si_snap);
  } else if (sub == ve) {
    set(ve, "--suite", "suite", ve_suite);
    set(ve, "--samples", "samples", ve_samples);
  } else if (sub == pi) {
    set(pi, "--only", "only", pi_only);
  }

  blab_session* session = nullptr;
  if (blab_session_create(nullptr, &session) != BLAB_OK) {
    std::cerr << "cannot create session\n";
    return kFail;
  }
  char* out = nullptr;
  blab_status rc = blab_run(session, command.c_str(), args.dump().c_str(), &out);
  if (rc != BLAB_OK) {
    std::cerr << command << ": " << blab_last_error(session) << "\n";
    blab_session_destroy(session);
    return rc == BLAB_ERR_PARAMETER || rc == BLAB_ERR_UNSUPPORTED ? kUsage : kFail;
  }
  Json res = Json::parse(out);
  blab_string_free(out);
  blab_session_destroy(session);
  try {
    emit(res, command, args["out_dir"].get<std::string>(), paths);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kFail;
  }
  summarize(res);
  return res["ok"].get<bool>() ? kOk : kFail;
}
