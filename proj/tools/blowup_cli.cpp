// blowup: batch front-end over the library modules.
// Exit codes: 0 ok, 1 invariant violated, 2 config/usage, 3 numerical failure.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "blowup/compactified_time.hpp"
#include "blowup/fuchsian_system.hpp"
#include "blowup/geometry_regions.hpp"
#include "blowup/params.hpp"
#include "blowup/reference_ode.hpp"
#include "blowup/wave_sim.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace blowup;

namespace {

constexpr const char* kVersion = "0.1.0";

enum Exit { kOk = 0, kInvariant = 1, kConfig = 2, kNumerical = 3 };

// ---- tables ----

using Cell = std::variant<double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  void add(std::vector<Cell> r) { rows.push_back(std::move(r)); }
};

std::string fmt_num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json cell_json(const Cell& c) {
  if (auto s = std::get_if<std::string>(&c)) return *s;
  const double v = std::get<double>(c);
  if (std::isfinite(v)) return v;
  return fmt_num(v);
}

struct Run {
  std::string command;
  fs::path out = ".";
  std::string format = "csv";
  ParameterSet p;
  unsigned threads = 1;
  json tolerances = json::object();
  json extra = json::object();
  std::vector<std::string> outputs;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void write_table(const std::string& stem, const Table& t) {
    fs::create_directories(out);
    const fs::path path = out / (stem + (format == "json" ? ".json" : ".csv"));
    std::ofstream os(path, std::ios::binary);
    if (!os) throw config_error("cannot write " + path.string());
    if (format == "json") {
      json arr = json::array();
      for (const auto& r : t.rows) {
        json o = json::object();
        for (std::size_t i = 0; i < t.columns.size(); ++i) o[t.columns[i]] = cell_json(r[i]);
        arr.push_back(std::move(o));
      }
      os << arr.dump(1) << '\n';
    } else {
      for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
      os << '\n';
      for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) {
          if (i) os << ',';
          if (auto s = std::get_if<std::string>(&r[i])) os << *s;
          else os << fmt_num(std::get<double>(r[i]));
        }
        os << '\n';
      }
    }
    outputs.push_back(path.filename().string());
  }

  void write_json(const std::string& stem, const json& j) {
    fs::create_directories(out);
    const fs::path path = out / (stem + ".json");
    std::ofstream os(path, std::ios::binary);
    os << j.dump(2) << '\n';
    outputs.push_back(path.filename().string());
  }

  void write_manifest(int status) {
    json m;
    m["command"] = command;
    m["tool_version"] = kVersion;
    m["params"] = params_json(p);
    m["tolerances"] = tolerances;
    m["threads"] = threads;
    m["format"] = format;
    m["outputs"] = outputs;
    if (!extra.empty()) m["settings"] = extra;
    m["exit_code"] = status;
    m["wall_clock_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    fs::create_directories(out);
    std::ofstream(out / "manifest.json", std::ios::binary) << m.dump(2) << '\n';
  }

  static json params_json(const ParameterSet& p) {
    return {{"a", p.a},         {"b", p.b},         {"c", p.c},           {"k", p.k},
            {"m2", p.m2},       {"beta", p.beta},   {"beta0", p.beta0},   {"t0", p.t0},
            {"A", p.A},         {"delta0", p.delta0}, {"sigma0", p.sigma0}, {"gamma", p.gamma}};
  }
};

// ---- parameters: defaults < config file < flags ----

struct ParamFlags {
  std::map<std::string, double> values;
  std::string config;
};

double* param_slot(ParameterSet& p, const std::string& k) {
  static const std::map<std::string, double ParameterSet::*> slots = {
      {"a", &ParameterSet::a},       {"b", &ParameterSet::b},           {"c", &ParameterSet::c},
      {"k", &ParameterSet::k},       {"m2", &ParameterSet::m2},         {"beta", &ParameterSet::beta},
      {"beta0", &ParameterSet::beta0}, {"t0", &ParameterSet::t0},       {"A", &ParameterSet::A},
      {"delta0", &ParameterSet::delta0}, {"sigma0", &ParameterSet::sigma0}, {"gamma", &ParameterSet::gamma}};
  auto it = slots.find(k);
  return it == slots.end() ? nullptr : &(p.*(it->second));
}

const std::vector<std::string>& param_names() {
  static const std::vector<std::string> n = {"a", "b", "c", "k", "m2", "beta", "beta0", "t0", "A", "delta0", "sigma0", "gamma"};
  return n;
}

// config keys outside the parameter set, consumed by individual commands
json load_config(const std::string& path, ParameterSet& p) {
  if (path.empty()) return json::object();
  std::ifstream is(path);
  if (!is) throw config_error("cannot open config " + path);
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw config_error(std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) throw config_error("config must be a JSON object");
  json rest = json::object();
  for (auto& [k, v] : j.items()) {
    if (double* s = param_slot(p, k)) {
      if (!v.is_number()) throw config_error("config key " + k + " must be a number");
      *s = v.get<double>();
    } else {
      rest[k] = v;
    }
  }
  return rest;
}

template <class T>
void take(const json& cfg, const char* key, T& dst, const CLI::App* sub) {
  const auto* opt = sub->get_option_no_throw(std::string("--") + key);
  if (opt && opt->count() > 0) return;  // flag wins
  if (cfg.contains(key)) {
    try {
      dst = cfg.at(key).get<T>();
    } catch (const json::exception&) {
      throw config_error(std::string("config key ") + key + " has the wrong type");
    }
  }
}

unsigned env_threads(unsigned fallback) {
  if (const char* s = std::getenv("BLOWUP_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(s, &end, 10);
    if (end == s || *end != 0 || v < 0) throw config_error("BLOWUP_THREADS must be a non-negative integer");
    return unsigned(v);
  }
  return fallback;
}

void print_validation(const ValidationReport& v) {
  for (const auto& c : v.checks)
    std::printf("  %-14s %s%s%s\n", c.name.c_str(), c.ok ? "ok" : "FAIL", c.detail.empty() ? "" : "  ",
                c.detail.c_str());
}

// ---- commands ----

int cmd_constants(Run& run, bool show_defaults) {
  if (show_defaults) {
    json j = Run::params_json(ParameterSet{});
    std::cout << j.dump(2) << '\n';
    return kOk;
  }
  const auto& p = run.p;
  const auto v = validate(p);
  const auto d = derive_constants(p);
  Table t{{"name", "value"}, {}};
  const std::vector<std::pair<std::string, double>> vals = {
      {"triangle", d.triangle}, {"abar", d.abar},     {"cbar", d.cbar},         {"B", d.B},
      {"Acon", d.Acon},         {"Bcon", d.Bcon},     {"Ccon", d.Ccon},         {"Dcon", d.Dcon},
      {"Econ", d.Econ},         {"t_star", d.t_star}, {"t_upper", d.t_upper.value_or(std::nan(""))},
      {"beta_breve", d.beta_breve}, {"b_geom", d.b_geom}, {"q_mag", d.q_mag},
      {"blowup_threshold", d.blowup_threshold}};
  for (const auto& [n, x] : vals) t.add({n, x});
  for (const auto& c : v.checks) t.add({"check:" + c.name, c.ok ? 1.0 : 0.0});
  run.write_table("constants", t);
  std::printf("%-18s %s\n", "constant", "value");
  for (const auto& [n, x] : vals) std::printf("%-18s %.12g\n", n.c_str(), x);
  std::printf("validation:\n");
  print_validation(v);
  return v.all_ok() ? kOk : kInvariant;
}

int cmd_ode(Run& run, std::size_t samples) {
  const auto& p = run.p;
  const auto d = derive_constants(p);
  OdeOptions o;
  o.samples = samples;
  o.time_share = 0.5;
  const auto tr = integrate(p, d, o);
  Table t{{"t", "f", "f0", "g_comp", "lower_env", "upper_env"}, {}};
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    const double s = tr.times[i];
    const double up = s < d.t_star ? 1.0 / d.upper_denominator(s) - 1.0 : std::nan("");
    t.add({s, tr.f[i], tr.f0[i], tr.g_comp[i], d.lower_envelope(s) - 1.0, up});
  }
  run.write_table("ode", t);
  const auto env = envelope_check(tr, p, d);
  json rep = {{"t_last", tr.t_last},
              {"t_star", d.t_star},
              {"lower_margin", env.lower},
              {"upper_margin", env.upper},
              {"improved_active", env.improved_thm_active},
              {"improved_margin", env.improved_thm_active ? json(env.improved_thm) : json(nullptr)}};
  if (tr.blowup_bracket) rep["blowup_bracket"] = {tr.blowup_bracket->first, tr.blowup_bracket->second};
  run.write_json("ode_report", rep);
  run.tolerances = {{"rtol", o.rtol}, {"atol", o.atol}, {"cap", o.cap}, {"envelope_tol", -1e-9}};
  std::printf("t_last %.10g  envelope margins lower %.3g upper %.3g\n", tr.t_last, env.lower, env.upper);
  const bool bracket_ok = tr.blowup_bracket && tr.blowup_bracket->second >= d.t_star * (1 - 1e-9);
  return env.all_ok() && bracket_ok ? kOk : kInvariant;
}

int cmd_compactify(Run& run, std::size_t samples) {
  const auto& p = run.p;
  const auto d = derive_constants(p);
  const auto tr = integrate(p, d, compactified_options(samples));
  const auto ct = build_compactified(tr, p, d);
  Table t{{"tau", "h_up", "f", "f0", "chi_up", "G", "xi", "Xi", "S"}, {}};
  for (std::size_t i = 0; i < ct.size(); ++i)
    t.add({ct.tau[i], ct.h_up[i], ct.f_tau[i], ct.f0_tau[i], ct.chi_up[i], ct.G_frak[i], ct.xi[i],
           ct.has_Xi() ? ct.Xi[i] : std::nan(""), ct.S[i]});
  run.write_table("compactify", t);
  const auto id = identity_residuals(ct);
  run.write_json("compactify_report", {{"iden1", id.iden1},
                                       {"iden2", id.iden2},
                                       {"iden3", id.iden3},
                                       {"keyid3", id.keyid3},
                                       {"f0_formula", id.f0_formula},
                                       {"tau_last", ct.tau.back()}});
  run.tolerances = {{"identity", 1e-6}, {"tau_stop", 1e-8}};
  std::printf("samples %zu  max identity residual %.3g\n", ct.size(), id.max());
  return id.max() < 1e-6 ? kOk : kInvariant;
}

int cmd_cone(Run& run, std::size_t samples) {
  const auto& p = run.p;
  const auto d = derive_constants(p);
  const auto tr = integrate(p, d, compactified_options(samples));
  const auto ct = build_compactified(tr, p, d);
  const auto cn = cone(tr, ct);
  Table t{{"t", "radius", "tau", "x", "zeta_abs", "xi_integral"}, {}};
  for (std::size_t i = 0; i < cn.t.size(); ++i)
    t.add({cn.t[i], cn.radius[i], cn.tau[i], cn.x[i], cn.zeta_abs[i], cn.xi_integral[i]});
  run.write_table("cone", t);
  run.write_json("cone_report", {{"form_mismatch", cn.form_mismatch},
                                 {"sqrtg_identity", cn.sqrtg_identity},
                                 {"theta", cn.theta},
                                 {"xi_total", cn.xi_total},
                                 {"tail_bound", cn.tail_bound}});
  run.tolerances = {{"form_mismatch", 1e-6}};
  std::printf("form mismatch %.3g  theta %.4g  Xi-integral %.4g\n", cn.form_mismatch, cn.theta, cn.xi_total);
  return cn.form_mismatch < 1e-6 ? kOk : kInvariant;
}

int cmd_lens(Run& run, std::size_t samples, std::size_t per_branch) {
  const auto& p = run.p;
  const auto d = derive_constants(p);
  const auto tr = integrate(p, d, compactified_options(samples));
  const auto ct = build_compactified(tr, p, d);
  const auto cn = cone(tr, ct);
  const auto L = lens_surface(p, d, ct);
  SpacelikeOptions so;
  so.samples_per_branch = per_branch;
  so.throw_on_fail = false;
  const auto mr = spacelike_check(p, L, ct, so);
  Table t{{"zeta1", "tau_Gamma", "branch", "D2", "min_minor", "decay_margin"}, {}};
  for (const auto& r : mr.rows)
    t.add({r.zeta, r.tau_Gamma, std::string(branch_name(r.branch)), r.D2_lower, r.min_minor, r.decay_margin});
  run.write_table("lens", t);

  // region map on a (t, x) lattice inside the traced window
  Table rm{{"t", "x", "tag"}, {}};
  const double t1 = std::min(tr.t_last, p.t0 + 1.0);
  std::vector<Coord> pts;
  for (int i = 0; i < 41; ++i)
    for (int j = 0; j < 41; ++j) pts.push_back({p.t0 + (t1 - p.t0) * i / 40.0, -6.0 + 12.0 * j / 40.0});
  const auto tags = classify_batch(pts, cn, ct, L, run.threads);
  for (std::size_t i = 0; i < pts.size(); ++i) rm.add({pts[i].time, pts[i].space, std::string(region_name(tags[i]))});
  run.write_table("regions", rm);

  const double split = std::abs(L.log_T_left(L.zt_split) - L.log_T_right(L.zt_split));
  const auto dec = decay_factor_check(L, ct, 40, 25, false);
  const auto ini = inI_check(L, cn, ct, 32);
  run.write_json("lens_report", {{"Xi0", L.Xi0},
                                 {"zeta_tilde_split", L.zt_split},
                                 {"branch_gap", split},
                                 {"min_D2", mr.min_D2},
                                 {"min_minor", mr.min_minor},
                                 {"decay_min_margin", dec.min_margin},
                                 {"decay_samples", dec.samples},
                                 {"inI", ini.in_I},
                                 {"inI_samples", ini.samples},
                                 {"inI_min_gap", ini.min_gap},
                                 {"inI_asymptotic_gap", ini.asymptotic_gap}});
  run.tolerances = {{"minor", so.tol}, {"branch_gap", 1e-12}};
  std::printf("split gap %.3g  min D2 %.4g  min minor %.4g  decay %.4g  inI %zu/%zu\n", split, mr.min_D2,
              mr.min_minor, dec.min_margin, ini.in_I, ini.samples);
  const bool ok = mr.ok && split < 1e-12 && dec.min_margin >= 0 && ini.in_I == ini.samples;
  return ok ? kOk : kInvariant;
}

int cmd_fuchsian(Run& run, const std::string& sweep, bool extended) {
  SweepBox box;
  if (sweep == "default") box = SweepBox::default_box();
  else if (sweep == "headline") box = SweepBox{{run.p.a}, {run.p.b}, {run.p.m2}};
  else throw config_error("unknown sweep '" + sweep + "' (default|headline)");
  H5Options o;
  o.threads = run.threads;
  const auto tab = extended ? certify_H5_extended(run.p, box, o) : certify_H5(run.p, box, o);
  Table t{{"a", "b", "m2", "lam_min_Asym", "lam_max_Asym", "lam_min_A0", "lam_max_A0", "sandwich_margin", "pass"}, {}};
  std::size_t passed = 0;
  for (const auto& r : tab.rows) {
    t.add({r.a, r.b, r.m2, r.lam_min_Asym, r.lam_max_Asym, r.lam_min_A0, r.lam_max_A0, r.sandwich_margin,
           std::string(r.pass ? "true" : "false")});
    passed += r.pass;
  }
  run.write_table("fuchsian", t);
  run.extra = {{"sweep", sweep}, {"extended", extended}, {"cells", tab.rows.size()}};
  run.tolerances = {{"As12", 1e-12}};
  std::printf("H5 pass %zu/%zu\n", passed, tab.rows.size());
  if (const auto* f = tab.first_failure())
    std::printf("first failure a=%.6g b=%.6g m2=%.6g lam_max(Asym)=%.6g margin=%.6g\n", f->a, f->b, f->m2,
                f->lam_max_Asym, f->sandwich_margin);
  return tab.all_pass() ? kOk : kInvariant;
}

struct SimFlags {
  double eps = 1e-6;
  double T = SimOptions{}.T;
  std::size_t cells = 2048;
  double L = 2.5;
  double K = 0;
  std::size_t every = 1;
};

int cmd_sim(Run& run, const SimFlags& f) {
  const auto& p = run.p;
  const auto v = validate(p);
  if (!v.all_ok()) {
    print_validation(v);
    throw config_error("simulation needs the main ranges and A1-A4");
  }
  const auto d = derive_constants(p);
  const auto geo = build_geometry(p, d);
  PerturbationProfile prof;
  prof.eps = prof.eps0 = f.eps;
  SimOptions o;
  o.T = f.T;
  o.grid.cells = f.cells;
  o.grid.L = f.L;
  o.K = f.K;
  o.threads = std::max(1u, run.threads);
  const auto r = simulate(p, d, prof, o);
  const auto tags = tag_stream(r, geo);

  Table t{{"t", "x", "rho", "rho_t", "g", "region_tag"}, {}};
  for (std::size_t i = 0; i < r.stream.size(); ++i) {
    if (i % f.every != 0 && i + 1 != r.stream.size()) continue;
    const auto& w = r.stream[i];
    for (std::size_t j = 0; j < r.x.size(); ++j)
      t.add({w.t, r.x[j], w.rho[j], w.rho_t[j], w.g[j], std::string(region_name(tags[i][j]))});
  }
  run.write_table("sim", t);

  const auto h = homogeneous_check(r, geo.cn);
  json rep = {{"steps", r.steps},
              {"dt", r.dt},
              {"h", r.h},
              {"max_cfl_ratio", r.max_cfl_ratio},
              {"radius_end", r.radius_end},
              {"grid_norm", prof.grid_norm(r.x)},
              {"log_smallness_bound", PerturbationProfile::log_smallness_bound(p)},
              {"homogeneous",
               {{"max_all_err", h.max_all_err},
                {"max_H_err", h.max_H_err},
                {"max_H_g_err", h.max_H_g_err},
                {"H_cells", h.H_cells},
                {"min_rho_drop", h.min_rho_drop}}}};
  bool ok = h.max_H_err < 1e-7 && h.max_H_g_err < 1e-8 && h.min_rho_drop >= 0;
  if (f.eps == 0) {
    ok = ok && h.max_all_err < 1e-7;
  } else {
    const auto e = envelope_verify(r, geo);
    const auto s = substitution_diagnostics(r, geo);
    rep["envelope"] = {{"C_hat_t0", e.C_t0},          {"C_hat_max", e.C_max},
                       {"drift", e.drift},            {"log_C", e.log_C_paper},
                       {"margin_rho", e.min_margin_rho}, {"margin_rho0", e.min_margin_rho0},
                       {"margin_rhoi", e.min_margin_rhoi}, {"bg_drift", e.drift_bg},
                       {"margin_bg", e.min_margin_bg}, {"cells", e.cells}};
    auto sup = [](const CompositeSup& c) { return json{{"core", c.core}, {"log_sup", c.log_sup}}; };
    rep["composite"] = {{"u0", sup(s.u0)}, {"ui", sup(s.ui)}, {"u", sup(s.u)},
                        {"v", sup(s.v)},   {"B", sup(s.B)},   {"z", sup(s.z)}};
    ok = ok && e.drift < 2 && e.drift_bg < 2 && e.min_margin_rho >= 0 && e.min_margin_rho0 >= 0 &&
         e.min_margin_rhoi >= 0 && e.min_margin_bg >= 0;
    std::printf("envelope drift %.4g  bg drift %.4g\n", e.drift, e.drift_bg);
  }
  run.write_json("sim_report", rep);
  run.extra = {{"epsilon", f.eps}, {"T", f.T},    {"cells", f.cells}, {"L", f.L},
               {"K", f.K},         {"dt", r.dt},  {"steps", r.steps}, {"cfl_safety", o.grid.cfl_safety},
               {"snapshot_every", f.every}, {"seed", nullptr}};
  run.tolerances = {{"homogeneous", 1e-7}, {"g_field", 1e-8}, {"drift", 2.0}};
  std::printf("steps %zu  dt %.4g  H-cell error %.3g  all-cell error %.3g\n", r.steps, r.dt, h.max_H_err,
              h.max_all_err);
  return ok ? kOk : kInvariant;
}

int cmd_sweep(Run& run, const std::string& param, const std::vector<double>& values, std::size_t samples) {
  if (!param_slot(run.p, param)) throw config_error("unknown sweep parameter " + param);
  if (values.empty()) throw config_error("sweep needs at least one value");
  struct Cellres {
    int status = 0;
    double t_last = 0, t_star = 0, lower = 0, upper = 0;
    std::string error;
  };
  std::vector<Cellres> res(values.size());
  detail::parallel_for(values.size(), run.threads, [&](std::size_t i) {
    Run sub;
    sub.command = "sweep/ode";
    sub.format = run.format;
    sub.p = run.p;
    *param_slot(sub.p, param) = values[i];
    char dir[64];
    std::snprintf(dir, sizeof dir, "cell_%03zu", i);
    sub.out = run.out / dir;
    sub.extra = {{"param", param}, {"value", values[i]}, {"index", i}};
    try {
      const auto d = derive_constants(sub.p);
      OdeOptions o;
      o.samples = samples;
      o.time_share = 0.5;
      const auto tr = integrate(sub.p, d, o);
      const auto env = envelope_check(tr, sub.p, d);
      Table t{{"t", "f", "f0", "g_comp"}, {}};
      for (std::size_t k = 0; k < tr.times.size(); ++k) t.add({tr.times[k], tr.f[k], tr.f0[k], tr.g_comp[k]});
      sub.write_table("ode", t);
      res[i] = {env.all_ok() ? kOk : kInvariant, tr.t_last, d.t_star, env.lower, env.upper, ""};
    } catch (const Error& e) {
      res[i].status = e.kind() == ErrorKind::Config ? kConfig : e.kind() == ErrorKind::Invariant ? kInvariant : kNumerical;
      res[i].error = e.what();
    }
    sub.write_manifest(res[i].status);
  });
  Table t{{"index", param, "status", "t_last", "t_star", "lower_margin", "upper_margin"}, {}};
  int worst = kOk;
  for (std::size_t i = 0; i < values.size(); ++i) {
    t.add({double(i), values[i], double(res[i].status), res[i].t_last, res[i].t_star, res[i].lower, res[i].upper});
    worst = std::max(worst, res[i].status);
    std::printf("cell %zu  %s=%.6g  status %d%s%s\n", i, param.c_str(), values[i], res[i].status,
                res[i].error.empty() ? "" : "  ", res[i].error.c_str());
  }
  run.write_table("sweep", t);
  run.extra = {{"param", param}, {"values", values}};
  return worst;
}

int exit_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Config: return kConfig;
    case ErrorKind::Invariant: return kInvariant;
    case ErrorKind::Numerical: return kNumerical;
  }
  return kNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"blow-up analysis toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);

  Run run;
  ParamFlags pf;
  std::string out_dir = ".";
  app.add_option("--config", pf.config, "JSON config; flags override its keys");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--format", run.format, "table format")->check(CLI::IsMember({"csv", "json"}));
  for (const auto& n : param_names()) app.add_option("--" + n, pf.values[n], "parameter " + n);

  auto* c_const = app.add_subcommand("constants", "derived constants and validation");
  bool show_defaults = false;
  c_const->add_flag("--show-defaults", show_defaults, "print the embedded default parameters");

  std::size_t samples = 4097, lens_samples = 16385, per_branch = 64;
  auto* c_ode = app.add_subcommand("ode", "reference ODE trace to blow-up");
  c_ode->add_option("--samples", samples);
  auto* c_comp = app.add_subcommand("compactify", "compactified-time fields");
  c_comp->add_option("--samples", lens_samples);
  auto* c_cone = app.add_subcommand("cone", "characteristic cone in both charts");
  c_cone->add_option("--samples", lens_samples);
  auto* c_lens = app.add_subcommand("lens", "lens surface minors, decay factor and regions");
  c_lens->add_option("--samples", lens_samples);
  c_lens->add_option("--per-branch", per_branch);

  std::string sweep = "default";
  bool extended = false;
  auto* c_fuch = app.add_subcommand("fuchsian", "H5 certification sweep");
  c_fuch->add_option("--sweep", sweep, "default | headline");
  c_fuch->add_flag("--extended", extended, "search constants instead of using the fixed ones");

  SimFlags sf;
  auto* c_sim = app.add_subcommand("sim", "1-D wave simulation with envelope checks");
  c_sim->add_option("--epsilon", sf.eps, "perturbation amplitude");
  c_sim->add_option("--T", sf.T, "horizon");
  c_sim->add_option("--cells", sf.cells);
  c_sim->add_option("--L", sf.L, "half-width of the domain");
  c_sim->add_option("--K", sf.K, "constant K coefficient");
  c_sim->add_option("--every", sf.every, "write every n-th snapshot")->check(CLI::PositiveNumber);

  std::string sweep_param = "beta";
  std::vector<double> sweep_values = {0.5, 1.0, 2.0};
  auto* c_sweep = app.add_subcommand("sweep", "reference ODE over a list of parameter values");
  c_sweep->add_option("--param", sweep_param);
  c_sweep->add_option("--values", sweep_values)->delimiter(',');
  c_sweep->add_option("--samples", samples);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  auto* sub = app.get_subcommands().front();
  run.command = sub->get_name();
  int status = kOk;
  try {
    const json cfg = load_config(pf.config, run.p);
    for (const auto& n : param_names())
      if (app.count("--" + n) > 0) *param_slot(run.p, n) = pf.values[n];
    if (app.count("--out") == 0 && cfg.contains("out")) out_dir = cfg["out"].get<std::string>();
    run.out = out_dir;
    run.threads = env_threads(sub == c_fuch ? 0u : 1u);
    take(cfg, "samples", samples, sub);
    take(cfg, "samples", lens_samples, sub);
    take(cfg, "epsilon", sf.eps, sub);
    take(cfg, "T", sf.T, sub);
    take(cfg, "cells", sf.cells, sub);
    take(cfg, "L", sf.L, sub);
    take(cfg, "K", sf.K, sub);
    take(cfg, "sweep", sweep, sub);
    take(cfg, "param", sweep_param, sub);
    take(cfg, "values", sweep_values, sub);

    if (sub == c_const) status = cmd_constants(run, show_defaults);
    else if (sub == c_ode) status = cmd_ode(run, samples);
    else if (sub == c_comp) status = cmd_compactify(run, lens_samples);
    else if (sub == c_cone) status = cmd_cone(run, lens_samples);
    else if (sub == c_lens) status = cmd_lens(run, lens_samples, per_branch);
    else if (sub == c_fuch) status = cmd_fuchsian(run, sweep, extended);
    else if (sub == c_sim) status = cmd_sim(run, sf);
    else if (sub == c_sweep) status = cmd_sweep(run, sweep_param, sweep_values, samples);
    if (!(sub == c_const && show_defaults)) run.write_manifest(status);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    status = exit_for(e);
    if (run.command != "constants" || !show_defaults) {
      try {
        if (status != kConfig) run.write_manifest(status);
      } catch (...) {
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    status = kNumerical;
  }
  return status;
}
