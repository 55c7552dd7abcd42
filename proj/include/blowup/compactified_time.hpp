#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <vector>

// pchip.hpp in Boost 1.74 uses isnan unqualified; pull boost::math::isnan in first
#include <boost/math/special_functions/fpclassify.hpp>
using boost::math::isnan;
#include <boost/math/interpolators/pchip.hpp>

#include "errors.hpp"
#include "numerics.hpp"
#include "params.hpp"
#include "reference_ode.hpp"

namespace blowup {

// Fields of the reference solution pulled back to compactified time tau = g(t).
// Grid quantities are indexed by sample; x = -ln(-tau) is the working abscissa
// since it spreads the approach to tau = 0 evenly.
struct CompactifiedTrace {
  ParameterSet p;
  DerivedConstants d;
  std::vector<double> tau, x;
  std::vector<double> u;  // sampling key x + w (t - t0), uniform on tau-mode traces
  double w = 0;
  std::vector<double> h_up, f_tau, f0_tau;
  std::vector<double> chi_up;    // chi via the f0 form
  std::vector<double> G_frak;    // chi - 2bB/(3-2c)
  std::vector<double> xi;        // 1/((-tau)(1+f))
  std::vector<double> sqrtS_chi; // sqrt(S) chi/B
  std::vector<double> Xi;        // sqrtS_chi - 2 b_geom; empty unless c = 4/3, k = 1
  std::vector<double> S, S_script, tauS_script;
  std::shared_ptr<const boost::math::interpolators::pchip<std::vector<double>>> h_interp;

  std::size_t size() const { return tau.size(); }
  bool has_Xi() const { return !Xi.empty(); }
  double chi_limit_over_B() const { return 2.0 * p.b / (3.0 - 2.0 * p.c); }

  // monotone cubic h_up(tau), exact at the samples
  double h_up_at(double t) const {
    if (!(t < 0.0) || t < -1.0) throw domain_exit("h_up queried outside [-1, 0)");
    const double xq = -std::log(-t);
    if (xq > x.back() * (1 + 1e-14)) throw domain_exit("h_up queried beyond the last sample tau = " + std::to_string(tau.back()));
    return (*h_interp)(std::min(xq, x.back()));
  }
  double field_at(const std::vector<double>& fld, double t) const { return interp_linear(x, fld, -std::log(-t)); }
};

namespace detail {

struct PointFields {
  double chi, G, xi, sqrtS_chi, Xi, S, tauS;
};

inline PointFields point_fields(const ParameterSet& p, const DerivedConstants& d, double t, double f, double f0,
                                double lg) {
  PointFields r{};
  const double mtau = std::exp(lg);
  r.chi = std::pow(t, 2.0 - p.a) * f0 / (std::pow(1.0 + f, 2.0 - p.c) * f * std::exp(lg * p.b / p.A));
  r.G = r.chi - 2.0 * p.b * d.B / (3.0 - 2.0 * p.c);
  r.xi = 1.0 / (mtau * (1.0 + f));
  const double GB = r.G / d.B, chiB = r.chi / d.B;
  r.tauS = (p.k - p.m2) / chiB * (4.0 / f - GB);
  r.S = p.k + (p.k - p.m2) * (12.0 - 2.0 * p.b - 8.0 * p.c) / (2.0 * p.b + (3.0 - 2.0 * p.c) * GB) + r.tauS;
  r.sqrtS_chi = std::sqrt(std::max(0.0, r.S)) * chiB;
  // radical form, exact for c = 4/3 and k = 1
  const double bg = d.b_geom;
  r.Xi = 2.0 * std::sqrt((1.0 + GB / (6.0 * p.b)) *
                         (bg * bg + 1.5 * p.b * p.m2 * GB + 6.0 * p.b * (1.0 - p.m2) / f)) -
         2.0 * bg;
  return r;
}

inline bool main_structure(const ParameterSet& p) {
  return std::abs(p.c - 4.0 / 3.0) < 1e-14 && std::abs(p.k - 1.0) < 1e-15;
}

}  // namespace detail

inline CompactifiedTrace build_compactified(const OdeTrace& tr, const ParameterSet& p, const DerivedConstants& d) {
  const std::size_t n = tr.times.size();
  if (n == 0) throw non_monotone_input("empty trace");
  for (std::size_t i = 1; i < n; ++i)
    // t itself saturates at double resolution once t_m - t ~ 1e-13, so only g must be strict
    if (!(tr.log_neg_g[i] < tr.log_neg_g[i - 1]) || tr.times[i] < tr.times[i - 1])
      throw non_monotone_input("g samples not strictly increasing at index " + std::to_string(i));

  CompactifiedTrace ct;
  ct.p = p;
  ct.d = d;
  ct.w = tr.sample_weight;
  const bool with_Xi = detail::main_structure(p);
  for (std::size_t i = 0; i < n; ++i) {
    const double lg = tr.log_neg_g[i];
    const auto pf = detail::point_fields(p, d, tr.times[i], tr.f[i], tr.f0[i], lg);
    ct.tau.push_back(-std::exp(lg));
    ct.x.push_back(-lg);
    ct.u.push_back(-lg + ct.w * (tr.times[i] - p.t0));
    ct.h_up.push_back(tr.times[i]);
    ct.f_tau.push_back(tr.f[i]);
    ct.f0_tau.push_back(tr.f0[i]);
    ct.chi_up.push_back(pf.chi);
    ct.G_frak.push_back(pf.G);
    ct.xi.push_back(pf.xi);
    ct.S.push_back(pf.S);
    ct.tauS_script.push_back(pf.tauS);
    ct.S_script.push_back(pf.tauS / ct.tau.back());
    ct.sqrtS_chi.push_back(pf.sqrtS_chi);
    if (with_Xi) ct.Xi.push_back(pf.Xi);
  }
  if (n >= 4) {
    std::vector<double> xs = ct.x, ts = ct.h_up;
    ct.h_interp = std::make_shared<const boost::math::interpolators::pchip<std::vector<double>>>(std::move(xs),
                                                                                                  std::move(ts));
  }
  return ct;
}

struct IdentityResiduals {
  double iden3 = 0, iden1 = 0, iden2 = 0, keyid3 = 0, f0_formula = 0;
  bool under_resolved = false;

  double max() const { return std::max({iden3, iden1, iden2, keyid3, f0_formula}); }
};

inline double rel_residual(double lhs, double rhs) { return std::abs(lhs - rhs) / (1.0 + std::abs(rhs)); }

inline IdentityResiduals identity_residuals(const CompactifiedTrace& ct) {
  IdentityResiduals r;
  r.under_resolved = ct.size() < 2;
  if (r.under_resolved) return r;
  const auto& p = ct.p;
  const double A = p.A, B = ct.d.B;
  for (std::size_t i = 0; i < ct.size(); ++i) {
    const double h = ct.h_up[i], f = ct.f_tau[i], f0 = ct.f0_tau[i], chi = ct.chi_up[i], mt = -ct.tau[i];
    const double mtb = std::pow(mt, p.b / A + 1.0);
    r.iden3 = std::max(r.iden3, rel_residual(std::pow(h, 1 - p.a) * std::pow(1 + f, p.c - 1) / (A * B * f * mtb),
                                             std::sqrt(chi) / (A * mt * std::sqrt(B) * std::sqrt(f))));
    r.iden1 = std::max(r.iden1, rel_residual(std::pow(h, -p.a) * std::pow(1 + f, p.c) / (f0 * A * B * mtb), 1.0 / (A * mt)));
    r.iden2 = std::max(r.iden2, rel_residual(std::pow(h, 2 - p.a) * std::pow(1 + f, p.c - 2) * f0 / (A * B * f * mtb),
                                             chi / (A * B * mt)));
    r.keyid3 = std::max(r.keyid3, rel_residual(h * f0 / (1 + f), std::sqrt(chi / B) * std::sqrt(f)));
    r.f0_formula = std::max(
        r.f0_formula, rel_residual(f0, std::pow(h, -p.a) * std::pow(mt, -p.b / A) * std::pow(1 + f, p.c) / B));
  }
  return r;
}

struct DtchiReport {
  double max_residual = 0;
  double h = 0;  // x-spacing of the grid used
  double max_dt_chi = -std::numeric_limits<double>::infinity();  // sign check: <= 0 expected when G >= 0
  std::size_t positive_count = 0;
  double G_floor = 0;  // |G| below G_floor * chi counts as zero in the sign check
};

// Central differences of chi in u on a tau-mode trace (uniform in u), compared
// with the closed-form d chi/dt times dt/du, du/dt = dx/dt + w. stencil = 3 or 5 points; points
// without a full stencil are skipped.
// The sign check zeroes G inside its round-off band: once f ~ 1e30 the factor
// sqrt(f) turns a 1e-12 cancellation error in G into an O(1e4) rate.
inline DtchiReport dtchi_residual(const CompactifiedTrace& ct, int stencil = 5, double G_floor = 1e-9) {
  DtchiReport r;
  r.G_floor = G_floor;
  const auto& p = ct.p;
  const double B = ct.d.B;
  const std::size_t w = stencil == 3 ? 1 : 2;
  if (ct.size() < 2 * w + 1) return r;
  r.h = ct.u[1] - ct.u[0];
  for (std::size_t i = 0; i < ct.size(); ++i) {
    const double t = ct.h_up[i], f = ct.f_tau[i], chi = ct.chi_up[i], G = ct.G_frak[i];
    auto rate = [&](double Gv) {
      return -(3 - 2 * p.c) * Gv * std::sqrt(f) * std::sqrt(chi) / (std::sqrt(B) * t) -
             std::pow(chi, 1.5) / (std::sqrt(B) * t * std::sqrt(f)) + 2 * (1 - p.a) * chi / t;
    };
    const double dchi_dt = rate(G);
    const double signed_rate = rate(std::abs(G) <= G_floor * chi ? 0.0 : G);
    r.max_dt_chi = std::max(r.max_dt_chi, signed_rate);
    if (signed_rate > 0) ++r.positive_count;
    if (i < w || i + w >= ct.size()) continue;
    const double mt = -ct.tau[i];
    const double dx_dt = p.A * B * std::pow(mt, p.b / p.A) * std::pow(t, p.a - 2) * f * std::pow(1 + f, 1 - p.c);
    const auto& c = ct.chi_up;
    const auto& u = ct.u;
    const double lhs = w == 1 ? (c[i + 1] - c[i - 1]) / (u[i + 1] - u[i - 1])
                              : (c[i - 2] - 8 * c[i - 1] + 8 * c[i + 1] - c[i + 2]) / (3 * (u[i + 2] - u[i - 2]));
    r.max_residual = std::max(r.max_residual, rel_residual(lhs, dchi_dt / (dx_dt + ct.w)));
  }
  return r;
}

// sup over the grid of |G| / (-tau)^{1/2}
inline double fit_G_constant(const CompactifiedTrace& ct) {
  double C = 0;
  for (std::size_t i = 0; i < ct.size(); ++i) C = std::max(C, std::abs(ct.G_frak[i]) / std::sqrt(-ct.tau[i]));
  return C;
}

struct AsymptoticsReport {
  double G_min = 0;              // >= 0 expected under A1
  double absG_max_increase = 0;  // max_i |G_{i+1}| - |G_i|, <= 0 expected
  double C_G = 0;
  double chi_over_B_at = 0, chi_over_B_limit = 0;  // at the probe tau
  double xi_first = 0, xi_last = 0;
  double Xi_max_increase = 0;  // max_i Xi_{i+1} - Xi_i
  double Xi_min = 0, Xi_last = 0, Xi0 = 0, Xi_sup = 0;
  double sqrtS_chi_min = 0, sqrtS_chi_last = 0, two_b_geom = 0;
  double S_min = 0, S_max = 0, S_upper_thpst = 0, S_upper_coef1_min = 0;
  double dt_chi_max = 0;  // max closed-form d chi/dt, <= 0 expected when G >= 0
};

inline AsymptoticsReport asymptotics(const CompactifiedTrace& ct, double probe_tau = -1e-6) {
  AsymptoticsReport r;
  const auto& p = ct.p;
  const std::size_t n = ct.size();
  r.G_min = *std::min_element(ct.G_frak.begin(), ct.G_frak.end());
  r.absG_max_increase = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < n; ++i)
    r.absG_max_increase = std::max(r.absG_max_increase, std::abs(ct.G_frak[i]) - std::abs(ct.G_frak[i - 1]));
  r.C_G = fit_G_constant(ct);
  r.chi_over_B_limit = ct.chi_limit_over_B();
  r.chi_over_B_at = ct.field_at(ct.chi_up, probe_tau) / ct.d.B;
  r.xi_first = ct.xi.front();
  r.xi_last = ct.xi.back();
  r.two_b_geom = 2 * ct.d.b_geom;
  r.sqrtS_chi_min = *std::min_element(ct.sqrtS_chi.begin(), ct.sqrtS_chi.end());
  r.sqrtS_chi_last = ct.sqrtS_chi.back();
  if (ct.has_Xi()) {
    r.Xi_max_increase = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < n; ++i) r.Xi_max_increase = std::max(r.Xi_max_increase, ct.Xi[i] - ct.Xi[i - 1]);
    r.Xi_min = *std::min_element(ct.Xi.begin(), ct.Xi.end());
    r.Xi_sup = *std::max_element(ct.Xi.begin(), ct.Xi.end());
    r.Xi_last = ct.Xi.back();
    r.Xi0 = ct.Xi.front();
  }
  r.S_min = *std::min_element(ct.S.begin(), ct.S.end());
  r.S_max = *std::max_element(ct.S.begin(), ct.S.end());
  r.S_upper_thpst = p.k * (3.0 + 1.0 / p.beta);
  r.S_upper_coef1_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double GB = ct.G_frak[i] / ct.d.B;
    const double ub = p.k * (1 + 1 / p.beta) +
                      (p.k - p.m2) * (12 - 2 * p.b - 8 * p.c) / (2 * p.b + (3 - 2 * p.c) * GB);
    r.S_upper_coef1_min = std::min(r.S_upper_coef1_min, ub - ct.S[i]);
  }
  r.dt_chi_max = dtchi_residual(ct).max_dt_chi;
  return r;
}

// d g/dt = A B rho (-g)^{b/A+1} / (t^{2-a} (1+rho)^{c-1})
inline double g_field_rhs(const ParameterSet& p, const DerivedConstants& d, double t, double rho, double g) {
  return p.A * d.B * rho * std::pow(-g, p.b / p.A + 1.0) / (std::pow(t, 2.0 - p.a) * std::pow(1.0 + rho, p.c - 1.0));
}

struct GSnapshot {
  double t;
  std::vector<double> rho, rho_t;
};

// Per-cell RK4 for g along a stream of snapshots; mid-step values of rho come
// from cubic Hermite interpolation with the stored time derivatives.
inline std::vector<std::vector<double>> evolve_g_field(const ParameterSet& p, const DerivedConstants& d,
                                                       const std::vector<GSnapshot>& stream) {
  std::vector<std::vector<double>> out;
  if (stream.empty()) return out;
  const std::size_t m = stream.front().rho.size();
  std::vector<double> g(m, -1.0);
  out.push_back(g);
  for (std::size_t s = 1; s < stream.size(); ++s) {
    const auto& A0 = stream[s - 1];
    const auto& A1 = stream[s];
    const double t0 = A0.t, dt = A1.t - A0.t;
    if (!(dt > 0)) throw non_monotone_input("stream times must increase");
    for (std::size_t j = 0; j < m; ++j) {
      const double mid = 0.5 * (A0.rho[j] + A1.rho[j]) + dt / 8.0 * (A0.rho_t[j] - A1.rho_t[j]);
      const double gj = g[j];
      const double k1 = g_field_rhs(p, d, t0, A0.rho[j], gj);
      const double k2 = g_field_rhs(p, d, t0 + dt / 2, mid, gj + dt / 2 * k1);
      const double k3 = g_field_rhs(p, d, t0 + dt / 2, mid, gj + dt / 2 * k2);
      const double k4 = g_field_rhs(p, d, t0 + dt, A1.rho[j], gj + dt * k3);
      g[j] = gj + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
      if (!(g[j] < 0.0)) throw domain_exit("g reached 0 at t = " + std::to_string(A1.t));
    }
    out.push_back(g);
  }
  return out;
}

// Trace settings used for the compactified pipeline: run to tau_stop instead
// of an f-cap, half the grid uniform in x and half in t.
inline OdeOptions compactified_options(std::size_t samples = 16385, double tau_stop = 1e-8, double time_share = 0.5) {
  OdeOptions o;
  o.time_share = time_share;
  o.cap = std::numeric_limits<double>::max();
  o.tau_stop = tau_stop;
  o.samples = samples;
  o.mode = SampleMode::Tau;
  return o;
}

}  // namespace blowup
