#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"

namespace blowup {

// Model and scheme constants. Defaults are the headline point
// (a,b,c) = (4/3,2/3,4/3), (beta,beta0,t0) = (1,4,1) with A = 1.
// m2 defaults to 1/2 rather than 1: at m2 = k the strict lower bound
// m2 < S degenerates to equality and Xi(t0) vanishes under A1 equality,
// which collapses the lens construction.
struct ParameterSet {
  double a = 4.0 / 3.0;
  double b = 2.0 / 3.0;
  double c = 4.0 / 3.0;
  double k = 1.0;
  double m2 = 0.5;
  double beta = 1.0;
  double beta0 = 4.0;
  double t0 = 1.0;
  double A = 1.0;
  double delta0 = 0.05;
  double sigma0 = 1e-3;
  double gamma = 1.0;  // torus scale for the arctan compactification
};

struct Check {
  std::string name;
  bool ok;
  std::string detail;
};

struct ValidationReport {
  std::vector<Check> checks;

  const Check* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
  bool ok(const std::string& name) const {
    const Check* c = find(name);
    return c && c->ok;
  }
  // Ranges needed by the reference ODE alone.
  bool ode_ranges_ok() const {
    for (const char* n : {"a>1", "b>0", "c_ode", "k>0", "m2_range", "beta>0", "beta0>0", "t0>0", "A_range"})
      if (!ok(n)) return false;
    return true;
  }
  // Ranges of the main theorems (adds a<=30, 1/3<=b<=2/3, c=4/3).
  bool main_ranges_ok() const {
    return ode_ranges_ok() && ok("a_range") && ok("b_range") && ok("c_main") && ok("delta0_range") &&
           ok("sigma0_range");
  }
  bool assumptions_ok() const { return ok("A1") && ok("A4"); }
  bool all_ok() const { return main_ranges_ok() && assumptions_ok(); }
};

inline double q_magnitude(double b, double m2) { return 606.0 / (2.0 - (2.0 - 3.0 * b) * m2); }

inline double b_geometric(double b, double m2) { return std::sqrt(9.0 * b * b * m2 - 6.0 * b * m2 + 6.0 * b); }

// A1 threshold value 6 b beta (1+beta)^2 / t0^2 for beta0^2.
inline double a1_rhs(const ParameterSet& p) { return 6.0 * p.b * p.beta * (1 + p.beta) * (1 + p.beta) / (p.t0 * p.t0); }

inline ValidationReport validate(const ParameterSet& p) {
  ValidationReport r;
  auto add = [&](std::string n, bool ok, std::string d = {}) { r.checks.push_back({std::move(n), ok, std::move(d)}); };
  add("a>1", p.a > 1.0);
  add("a_range", p.a > 1.0 && p.a <= 30.0, "1 < a <= 30");
  add("b>0", p.b > 0.0);
  add("b_range", p.b >= 1.0 / 3.0 - 1e-15 && p.b <= 2.0 / 3.0 + 1e-15, "1/3 <= b <= 2/3");
  add("c_ode", p.c > 1.0 && p.c < 1.5, "1 < c < 3/2");
  add("c_main", std::abs(p.c - 4.0 / 3.0) < 1e-14, "c = 4/3");
  add("k>0", p.k > 0.0);
  add("m2_range", p.m2 >= 0.0 && p.m2 <= p.k, "0 <= m2 <= k");
  add("beta>0", p.beta > 0.0);
  add("beta0>0", p.beta0 > 0.0);
  add("t0>0", p.t0 > 0.0);
  add("A_range", p.A > 0.0 && p.A < 2.0 * p.b / (3.0 - 2.0 * p.c), "0 < A < 2b/(3-2c)");
  add("delta0_range", p.delta0 > 0.0 && p.delta0 < 1.0);
  add("sigma0_range", p.sigma0 > 0.0 && p.sigma0 < 1.0);

  const double lhs = p.beta0 * p.beta0, rhs = a1_rhs(p);
  // equality is admitted; the relative slack absorbs decimal input like 4.0 vs 16/4
  add("A1", lhs >= rhs * (1.0 - 1e-14), "beta0^2 = " + std::to_string(lhs) + " vs " + std::to_string(rhs));

  // A3: |q| from its formula; the stated bracket is informational only
  const double q = q_magnitude(p.b, p.m2);
  const double hi = 606.0 / (2.0 - p.m2);
  add("A3", std::isfinite(q) && q > 0.0,
      "|q| = " + std::to_string(q) + (q >= 303.0 && q <= hi ? " (inside" : " (outside") +
          " informational bracket [303, 606/(2-m2)])");
  add("A4", std::abs(p.k - 1.0) < 1e-15, "k = 1");
  return r;
}

struct DerivedConstants {
  double triangle = 0;  // sqrt((1-a)^2 + 4b)
  double abar = 0;      // 1 - a
  double cbar = 0;      // 1 - c
  double B = 0;         // (1+beta)^c / (t0^a beta0)
  double Acon = 0, Bcon = 0, Ccon = 0, Dcon = 0, Econ = 0;
  double t_star = 0;                 // first root of the upper-envelope denominator
  std::vector<double> t_star_roots;  // every sign change seen on the scan
  std::optional<double> t_upper;     // defined when t0^abar > 1/E
  double beta_breve = 0;
  double b_geom = 0;
  double q_mag = 0;
  double blowup_threshold = 0;  // abar (1+beta) / (cbar t0)

  double exp_minus() const { return (abar - triangle) / 2; }
  double exp_plus() const { return (abar + triangle) / 2; }

  // A t^{(abar-D)/2} + B t^{(abar+D)/2} + 1
  double upper_denominator(double t) const {
    return Acon * std::pow(t, exp_minus()) + Bcon * std::pow(t, exp_plus()) + 1.0;
  }
  double lower_envelope(double t) const { return std::exp(Ccon * std::pow(t, exp_plus()) + Dcon / t); }
  double upper_envelope(double t) const { return 1.0 / upper_denominator(t); }
};

struct RootOptions {
  double horizon_factor = 1e6;  // search t in (t0, t0*horizon_factor]
  double rel_tol = 1e-12;
  int scan_points = 4000;
};

// Every closed-form field; t_star is left at 0.
inline DerivedConstants derive_closed_forms(const ParameterSet& p) {
  const ValidationReport v = validate(p);
  if (!v.ode_ranges_ok()) throw config_error("parameter ranges violated; derive_constants needs a>1, b>0, 1<c<3/2");

  DerivedConstants d;
  d.abar = 1.0 - p.a;
  d.cbar = 1.0 - p.c;
  d.triangle = std::sqrt(d.abar * d.abar + 4.0 * p.b);
  d.B = std::pow(1.0 + p.beta, p.c) / (std::pow(p.t0, p.a) * p.beta0);

  const double em = d.exp_minus(), ep = d.exp_plus();
  const double r1 = p.beta / (1.0 + p.beta);
  const double r2 = p.t0 * p.beta0 / ((1.0 + p.beta) * (1.0 + p.beta));
  const double r3 = p.t0 * p.beta0 / (1.0 + p.beta);
  d.Acon = std::pow(p.t0, -em) / d.triangle * (r2 - ep * r1);
  d.Bcon = std::pow(p.t0, -ep) / d.triangle * (em * r1 - r2);
  const double ratio = ep / p.b;  // (abar+D)/(2b)
  d.Ccon = 2.0 / (2.0 + d.abar + d.triangle) / std::max(ratio, 1.0) *
           (std::log1p(p.beta) + ratio * r3) * std::pow(p.t0, -ep);
  d.Dcon = (d.abar + d.triangle) / (2.0 + d.abar + d.triangle) * (std::log1p(p.beta) - r3 / p.b) * p.t0;
  d.Econ = d.cbar * p.beta0 * std::pow(p.t0, 1.0 - d.abar) / (d.abar * (1.0 + p.beta));

  const double t0a = std::pow(p.t0, d.abar);
  if (t0a > 1.0 / d.Econ) d.t_upper = std::pow(t0a - 1.0 / d.Econ, 1.0 / d.abar);

  d.beta_breve = p.t0 * p.beta0 / (3.0 * (p.a - 1.0) * (1.0 + p.beta)) - 1.0;
  d.b_geom = b_geometric(p.b, p.m2);
  d.q_mag = q_magnitude(p.b, p.m2);
  d.blowup_threshold = d.abar * (1.0 + p.beta) / (d.cbar * p.t0);
  return d;
}

inline DerivedConstants derive_constants(const ParameterSet& p, const RootOptions& ro = {}) {
  DerivedConstants d = derive_closed_forms(p);
  // t_star: log scan for every sign change, then bisection on the first
  auto P = [&](double t) { return d.upper_denominator(t); };
  const double lo = std::log(p.t0), hi = std::log(p.t0 * ro.horizon_factor);
  double tp = p.t0, Pp = P(p.t0);
  std::vector<std::pair<double, double>> brackets;
  for (int i = 1; i <= ro.scan_points; ++i) {
    const double t = std::exp(lo + (hi - lo) * i / ro.scan_points);
    const double Pt = P(t);
    if ((Pp > 0) != (Pt > 0)) brackets.emplace_back(tp, t);
    tp = t;
    Pp = Pt;
  }
  if (brackets.empty()) throw no_root_found("no sign change of the upper-envelope denominator up to t0*" +
                                            std::to_string(ro.horizon_factor));
  for (auto [x0, x1] : brackets) {
    double f0 = P(x0);
    while (x1 - x0 > ro.rel_tol * x1) {
      const double xm = 0.5 * (x0 + x1);
      const double fm = P(xm);
      if ((fm > 0) == (f0 > 0)) {
        x0 = xm;
        f0 = fm;
      } else {
        x1 = xm;
      }
    }
    d.t_star_roots.push_back(0.5 * (x0 + x1));
  }
  d.t_star = d.t_star_roots.front();
  return d;
}

inline bool blowup_condition(const ParameterSet& p) {
  const double abar = 1.0 - p.a, cbar = 1.0 - p.c;
  return p.beta0 > abar * (1.0 + p.beta) / (cbar * p.t0);
}

}  // namespace blowup
