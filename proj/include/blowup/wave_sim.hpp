#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "compactified_time.hpp"
#include "errors.hpp"
#include "fuchsian_system.hpp"
#include "geometry_regions.hpp"
#include "params.hpp"
#include "reference_ode.hpp"

namespace blowup {

// 1-D method of lines on nodes x_j = -L + j h, j = 1..N-1, with both
// boundary nodes and the ghosts beyond them clamped to the homogeneous
// solution. The homogeneous solution itself is advanced as one more cell
// through the same right-hand side, so an unperturbed run reproduces it
// bit for bit.

struct GridSpec {
  std::size_t cells = 2048;
  double L = 2.5;
  double cfl_safety = 2.5;
  double g_headroom = 1.5;  // dt is sized for g_max(t0) times this
  double dt = 0;            // 0: derived from the CFL condition
  std::size_t snapshot_every = 1;
  std::size_t max_steps = 1'000'000;
};

// C^2 polynomial bumps eps (1 - x^2)^3 on B_1(0)
struct PerturbationProfile {
  double eps = 1e-6;
  double eps0 = 1e-6;
  int power = 3;

  double psi(double x) const { return x * x < 1 ? eps * std::pow(1 - x * x, power) : 0.0; }
  double psi0(double x) const { return x * x < 1 ? eps0 * std::pow(1 - x * x, power) : 0.0; }
  double dpsi(double x) const {
    return x * x < 1 ? -2.0 * power * x * eps * std::pow(1 - x * x, power - 1) : 0.0;
  }
  // grid surrogate of the Sobolev smallness norm
  double grid_norm(const std::vector<double>& xs) const {
    double a = 0, b = 0, c = 0;
    for (double x : xs) {
      a = std::max(a, std::abs(psi(x)));
      b = std::max(b, std::abs(dpsi(x)));
      c = std::max(c, std::abs(psi0(x)));
    }
    return a + b + c;
  }
  // ln of e^{-303/delta0} sigma0^2; the bound itself underflows
  static double log_smallness_bound(const ParameterSet& p) { return -303 / p.delta0 + 2 * std::log(p.sigma0); }
};

struct SimOptions {
  double T = 0.002;  // envelope drift passes 2x near T = 0.0023
  GridSpec grid;
  double K = 0;  // constant K^{11}
  unsigned threads = 1;
};

struct WaveState {
  double t = 0;
  std::vector<double> rho, rho_t, g;
  double f = 0, f0 = 0, g_hom = -1;  // homogeneous cell
};

struct SimResult {
  ParameterSet p;
  DerivedConstants d;
  PerturbationProfile profile;
  SimOptions opt;
  std::vector<double> x;
  double h = 0, dt = 0;
  std::size_t steps = 0;
  double max_cfl_ratio = 0;  // max dt sqrt(g) safety / h, <= 1 required
  double radius_end = 0;     // cone radius at t0 + T
  std::vector<WaveState> stream;
  OdeTrace ref;  // reference ODE on [t0, t0 + 1.01 T]
};

// Hermite interpolation of the reference f and f0 on a uniform time grid.
struct DenseReference {
  ParameterSet p;
  std::vector<double> t, f, f0, f1;  // f1 = f''
  double f_at(double s) const { return eval(s, f, f0); }
  double f0_at(double s) const { return eval(s, f0, f1); }

  static double fpp(const ParameterSet& p, double t, double f, double f0) {
    return -(p.a / t) * f0 + (p.b / (t * t)) * f * (1 + f) + p.c * f0 * f0 / (1 + f);
  }

 private:
  double eval(double s, const std::vector<double>& y, const std::vector<double>& dy) const {
    if (s < t.front() || s > t.back()) throw domain_exit("reference queried outside its horizon");
    const double hstep = (t.back() - t.front()) / double(t.size() - 1);
    std::size_t i = std::min<std::size_t>(std::size_t((s - t.front()) / hstep), t.size() - 2);
    const double hh = t[i + 1] - t[i], u = (s - t[i]) / hh;
    const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
    const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
    return h00 * y[i] + h10 * hh * dy[i] + h01 * y[i + 1] + h11 * hh * dy[i + 1];
  }
};

inline DenseReference dense_reference(const ParameterSet& p, const OdeTrace& tr) {
  DenseReference r;
  r.p = p;
  r.t = tr.times;
  r.f = tr.f;
  r.f0 = tr.f0;
  for (std::size_t i = 0; i < tr.times.size(); ++i) r.f1.push_back(DenseReference::fpp(p, tr.times[i], tr.f[i], tr.f0[i]));
  return r;
}

namespace detail {

inline double wave_speed2(const ParameterSet& p, double t, double r, double rt) {
  return p.m2 * rt * rt / ((1 + r) * (1 + r)) + 4 * (p.k - p.m2) * (1 + r) / (t * t);
}

// rho_tt at one cell; uxx, ux, uxc are second, upwind and centred first differences
inline double cell_rhs(const ParameterSet& p, double q, double K, double t, double r, double rt, double uxx, double ux,
                       double uxc) {
  const double G = wave_speed2(p, t, r, rt);
  return G * (uxx + q * ux) + (p.b / (t * t)) * r * (1 + r) - (p.a / t) * rt + p.c * rt * rt / (1 + r) -
         K / (t * t) * uxc * uxc;
}

struct Fields {
  std::vector<double> r, rt;
  double f = 0, ft = 0;
};

inline void axpy_fields(Fields& out, const Fields& a, double s, const Fields& k) {
  for (std::size_t j = 0; j < a.r.size(); ++j) {
    out.r[j] = a.r[j] + s * k.r[j];
    out.rt[j] = a.rt[j] + s * k.rt[j];
  }
  out.f = a.f + s * k.f;
  out.ft = a.ft + s * k.ft;
}

}  // namespace detail

inline SimResult simulate(const ParameterSet& p, const DerivedConstants& d, const PerturbationProfile& prof,
                          const SimOptions& opt = {}) {
  const auto v = validate(p);
  if (!v.ode_ranges_ok()) throw config_error("parameters outside the ODE ranges");
  if (!(opt.T > 0)) throw config_error("horizon T must be positive");
  const auto& gs = opt.grid;
  if (gs.cells < 8) throw config_error("need at least 8 cells");

  SimResult res;
  res.p = p;
  res.d = d;
  res.profile = prof;
  res.opt = opt;
  const std::size_t N = gs.cells, m = N - 1;
  res.h = 2 * gs.L / double(N);
  for (std::size_t j = 1; j < N; ++j) res.x.push_back(-gs.L + double(j) * res.h);

  OdeOptions oo;
  oo.t_end = p.t0 + 1.01 * opt.T;
  oo.mode = SampleMode::Time;
  oo.samples = 4097;
  oo.cap = std::numeric_limits<double>::max();
  res.ref = integrate(p, d, oo);
  if (res.ref.times.back() < *oo.t_end * (1 - 1e-12)) throw domain_exit("reference blows up inside the horizon");
  res.radius_end = interp_linear(res.ref.times, res.ref.radius, p.t0 + opt.T);
  if (!(gs.L > res.radius_end + 1))
    throw domain_too_small("L = " + std::to_string(gs.L) + " but the cone reaches " + std::to_string(res.radius_end));

  detail::Fields u;
  u.r.resize(m);
  u.rt.resize(m);
  double gmax = 0;
  for (std::size_t j = 0; j < m; ++j) {
    u.r[j] = p.beta + prof.psi(res.x[j]);
    u.rt[j] = p.beta0 + prof.psi0(res.x[j]);
    const double G = detail::wave_speed2(p, p.t0, u.r[j], u.rt[j]);
    if (!(u.r[j] > 0) || !(G > 0) || !std::isfinite(G))
      throw positivity_loss("initial data not admissible at x = " + std::to_string(res.x[j]));
    gmax = std::max(gmax, G);
  }
  u.f = p.beta;
  u.ft = p.beta0;
  const double dt_cfl = res.h / (gs.cfl_safety * std::sqrt(gmax * gs.g_headroom));
  double dt = gs.dt > 0 ? gs.dt : dt_cfl;
  if (gs.dt > 0 && res.h / gs.dt <= std::sqrt(gmax) * gs.cfl_safety)
    throw cfl_violation("h/dt = " + std::to_string(res.h / gs.dt) + " is below the safety bound");
  const double nsteps_real = std::ceil(opt.T / dt - 1e-12);
  if (!(nsteps_real <= double(gs.max_steps))) throw config_error("step count " + std::to_string(nsteps_real) + " exceeds the desk budget");
  const auto nsteps = std::size_t(nsteps_real);
  dt = opt.T / double(nsteps);
  res.dt = dt;

  const double q = d.q_mag;
  const double ih2 = 1 / (res.h * res.h), i2h = 1 / (2 * res.h);
  auto rhs = [&](double t, const detail::Fields& s, detail::Fields& k) {
    auto at = [&](std::ptrdiff_t j) { return j < 0 || j >= std::ptrdiff_t(m) ? s.f : s.r[std::size_t(j)]; };
    auto body = [&](std::size_t lo, std::size_t hi) {
      for (std::size_t j = lo; j < hi; ++j) {
        const auto J = std::ptrdiff_t(j);
        const double r0 = s.r[j], rp = at(J + 1), rm = at(J - 1), rpp = at(J + 2);
        const double uxx = ((rp - r0) - (r0 - rm)) * ih2;
        const double ux = (4 * (rp - r0) - (rpp - r0)) * i2h;
        const double uxc = (rp - rm) * i2h;
        k.r[j] = s.rt[j];
        k.rt[j] = detail::cell_rhs(p, q, opt.K, t, r0, s.rt[j], uxx, ux, uxc);
      }
    };
    if (opt.threads > 1) {
      const std::size_t chunks = opt.threads, per = (m + chunks - 1) / chunks;
      detail::parallel_for(chunks, opt.threads, [&](std::size_t c) { body(c * per, std::min(m, (c + 1) * per)); });
    } else {
      body(0, m);
    }
    k.r.resize(m);
    k.f = s.ft;
    k.ft = detail::cell_rhs(p, q, opt.K, t, s.f, s.ft, 0.0, 0.0, 0.0);
  };

  auto snapshot = [&](double t, const detail::Fields& s) {
    WaveState w;
    w.t = t;
    w.rho = s.r;
    w.rho_t = s.rt;
    w.f = s.f;
    w.f0 = s.ft;
    res.stream.push_back(std::move(w));
  };

  detail::Fields k1{std::vector<double>(m), std::vector<double>(m)}, k2 = k1, k3 = k1, k4 = k1, tmp = k1;
  double t = p.t0;
  snapshot(t, u);
  for (std::size_t n = 0; n < nsteps; ++n) {
    rhs(t, u, k1);
    detail::axpy_fields(tmp, u, dt / 2, k1);
    rhs(t + dt / 2, tmp, k2);
    detail::axpy_fields(tmp, u, dt / 2, k2);
    rhs(t + dt / 2, tmp, k3);
    detail::axpy_fields(tmp, u, dt, k3);
    rhs(t + dt, tmp, k4);
    for (std::size_t j = 0; j < m; ++j) {
      u.r[j] += dt / 6 * (k1.r[j] + 2 * k2.r[j] + 2 * k3.r[j] + k4.r[j]);
      u.rt[j] += dt / 6 * (k1.rt[j] + 2 * k2.rt[j] + 2 * k3.rt[j] + k4.rt[j]);
    }
    u.f += dt / 6 * (k1.f + 2 * k2.f + 2 * k3.f + k4.f);
    u.ft += dt / 6 * (k1.ft + 2 * k2.ft + 2 * k3.ft + k4.ft);
    t = n + 1 == nsteps ? p.t0 + opt.T : p.t0 + double(n + 1) * dt;

    double g2 = detail::wave_speed2(p, t, u.f, u.ft);
    for (std::size_t j = 0; j < m; ++j) {
      const double G = detail::wave_speed2(p, t, u.r[j], u.rt[j]);
      if (!(u.r[j] > 0) || !(G > 0))
        throw positivity_loss("rho or g lost positivity at t = " + std::to_string(t) + ", x = " +
                              std::to_string(res.x[j]));
      g2 = std::max(g2, G);
    }
    res.max_cfl_ratio = std::max(res.max_cfl_ratio, dt * std::sqrt(g2) * gs.cfl_safety / res.h);
    if (res.max_cfl_ratio >= 1) throw cfl_violation("wave speed outgrew the step at t = " + std::to_string(t));
    if ((n + 1) % gs.snapshot_every == 0 || n + 1 == nsteps) snapshot(t, u);
  }
  res.steps = nsteps;

  // g co-evolved per cell, the homogeneous cell riding along as the last column
  std::vector<GSnapshot> gsnap;
  for (const auto& w : res.stream) {
    GSnapshot s{w.t, w.rho, w.rho_t};
    s.rho.push_back(w.f);
    s.rho_t.push_back(w.f0);
    gsnap.push_back(std::move(s));
  }
  const auto G = evolve_g_field(p, d, gsnap);
  for (std::size_t i = 0; i < res.stream.size(); ++i) {
    res.stream[i].g.assign(G[i].begin(), G[i].end() - 1);
    res.stream[i].g_hom = G[i].back();
  }
  return res;
}

// ---- region tags ----

struct Geometry {
  OdeTrace tr;
  CompactifiedTrace ct;
  ConeTrace cn;
  LensSurface L;
};

inline Geometry build_geometry(const ParameterSet& p, const DerivedConstants& d, std::size_t samples = 16385) {
  Geometry g;
  g.tr = integrate(p, d, compactified_options(samples));
  g.ct = build_compactified(g.tr, p, d);
  g.cn = cone(g.tr, g.ct);
  g.L = lens_surface(p, d, g.ct);
  return g;
}

inline std::vector<std::vector<Region>> tag_stream(const SimResult& r, const Geometry& geo) {
  std::vector<std::vector<Region>> out;
  for (const auto& w : r.stream) {
    const double rad = geo.cn.radius_at_t(w.t);
    std::vector<Region> row;
    for (double x : r.x) row.push_back(classify_with_radius(w.t, x, rad, lens_time(geo.L, geo.ct, x)));
    out.push_back(std::move(row));
  }
  return out;
}

// cells safely outside the cone: at least `band` nodes beyond the radius
inline bool outside_cone(double x, double radius, double h, double band = 2) {
  return std::abs(x) >= radius + band * h;
}

// ---- homogeneous consistency ----

struct HomogeneousReport {
  double max_ref_err = 0;    // |f_cell - f_ref| over the stream
  double max_H_err = 0;      // |rho - f_ref| on cells outside the cone band
  double max_H_g_err = 0;    // |g - g_hom| there
  double max_all_err = 0;    // |rho - f_ref| over every cell
  double min_rho_drop = 0;   // most negative change of min_x rho between snapshots
  std::size_t H_cells = 0;
};

inline HomogeneousReport homogeneous_check(const SimResult& r, const ConeTrace& cn) {
  HomogeneousReport h;
  const auto ref = dense_reference(r.p, r.ref);
  double prev_min = -std::numeric_limits<double>::infinity();
  for (const auto& w : r.stream) {
    const double fr = ref.f_at(w.t);
    h.max_ref_err = std::max(h.max_ref_err, std::abs(w.f - fr));
    const double rad = cn.radius_at_t(w.t);
    double mn = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < r.x.size(); ++j) {
      const double e = std::abs(w.rho[j] - fr);
      h.max_all_err = std::max(h.max_all_err, e);
      mn = std::min(mn, w.rho[j]);
      if (outside_cone(r.x[j], rad, r.h)) {
        ++h.H_cells;
        h.max_H_err = std::max(h.max_H_err, e);
        h.max_H_g_err = std::max(h.max_H_g_err, std::abs(w.g[j] - w.g_hom));
      }
    }
    h.min_rho_drop = std::min(h.min_rho_drop, mn - prev_min);
    prev_min = mn;
  }
  return h;
}

// ---- envelope sandwiches ----

namespace detail {

// smallest s in [0, 1) with fn(s) >= 0 for an increasing fn
template <class Fn>
double min_scale(Fn fn) {
  if (fn(0.0) >= 0) return 0.0;
  double hi = 1e-12;
  while (fn(hi) < 0) {
    hi *= 2;
    if (hi >= 1) throw inequality_violated("no envelope scale below 1 satisfies the sandwich");
  }
  boost::uintmax_t it = 200;
  const auto r = boost::math::tools::toms748_solve(fn, 0.0, hi, fn(0.0), fn(hi),
                                                    boost::math::tools::eps_tolerance<double>(40), it);
  return r.second;
}

}  // namespace detail

// C is reported as C_hat = C sigma0^2 e^{-100/delta0}; ln C adds back the underflowing factor
struct SimEnvelopeReport {
  std::vector<double> times;
  std::vector<double> C_hat;     // smallest scale making every sandwich hold at that time
  std::vector<double> C_bg;      // same for the h_up o g sandwich (t > t0)
  double C_t0 = 0, C_max = 0, drift = 0;
  double C_bg_first = 0, C_bg_max = 0, C_bg_min = 0, drift_bg = 0;
  double log_C_paper = 0;        // ln C at t0
  double min_margin_rho = 0, min_margin_rho0 = 0, min_margin_rhoi = 0, min_margin_bg = 0;  // with 2 C_t0
  std::size_t cells = 0;
};

inline double envelope_weight(double x) { return std::exp(-0.75 * x); }

struct CompositePoint {
  double H = 0;         // h_up(g(t,x))
  double f = 0, f0 = 0; // f, f0 at H
  double chi = 0;
};

// h_up o g through a second-order Newton step about the homogeneous cell
inline CompositePoint composite_point(const ParameterSet& p, const DerivedConstants& d, const WaveState& w,
                                      double g) {
  CompositePoint c;
  const double gp = g_field_rhs(p, d, w.t, w.f, w.g_hom);
  const double eta = 1e-5 * w.t;
  const double gpp = (g_field_rhs(p, d, w.t + eta, w.f + eta * w.f0, w.g_hom + eta * gp) -
                      g_field_rhs(p, d, w.t - eta, w.f - eta * w.f0, w.g_hom - eta * gp)) /
                     (2 * eta);
  const double dg = g - w.g_hom;
  const double dtau = dg / gp - 0.5 * gpp * dg * dg / (gp * gp * gp);
  const double fpp = DenseReference::fpp(p, w.t, w.f, w.f0);
  c.H = w.t + dtau;
  c.f = w.f + w.f0 * dtau + 0.5 * fpp * dtau * dtau;
  c.f0 = w.f0 + fpp * dtau;
  c.chi = detail::point_fields(p, d, c.H, c.f, c.f0, std::log(-g)).chi;
  return c;
}

inline SimEnvelopeReport envelope_verify(const SimResult& r, const Geometry& geo) {
  SimEnvelopeReport e;
  const auto& p = r.p;
  const auto ref = dense_reference(p, r.ref);
  const auto tags = tag_stream(r, geo);
  const double t0 = p.t0;
  const std::size_t m = r.x.size();

  struct Margins {
    double rho = std::numeric_limits<double>::infinity(), rho0 = rho, rhoi = rho, bg = rho;
  };
  auto cell_margins = [&](const WaveState& w, std::size_t j, double s, double sbg, Margins& M) {
    const double dt = w.t - t0;
    const double up = 1 + s, lo = 1 - s;
    const double fu = ref.f_at(t0 + up * dt), fl = ref.f_at(t0 + lo * dt);
    M.rho = std::min({M.rho, up * fu - w.rho[j], w.rho[j] - lo * fl});
    M.rho0 = std::min({M.rho0, up * ref.f0_at(t0 + up * dt) - w.rho_t[j], w.rho_t[j] - lo * ref.f0_at(t0 + lo * dt)});
    const double rx = (j + 1 < m ? w.rho[j + 1] : w.f) - (j > 0 ? w.rho[j - 1] : w.f);
    const double rxi = rx / (2 * r.h);
    M.rhoi = std::min({M.rhoi, s * (1 + fu) - rxi, rxi + s * (1 + fl)});
    if (dt > 0) {
      const double H = composite_point(p, r.d, w, w.g[j]).H;
      M.bg = std::min({M.bg, t0 + (1 + sbg) * dt - H, H - (t0 + (1 - sbg) * dt)});
    }
  };

  for (std::size_t i = 0; i < r.stream.size(); ++i) {
    const auto& w = r.stream[i];
    const double dt = w.t - t0;
    double C = 0, Cb = 0;
    for (std::size_t j = 0; j < m; ++j) {
      if (tags[i][j] != Region::KI) continue;
      ++e.cells;
      const double wx = envelope_weight(r.x[j]);
      const double v = w.rho[j], v0 = w.rho_t[j];
      const double rxi = ((j + 1 < m ? w.rho[j + 1] : w.f) - (j > 0 ? w.rho[j - 1] : w.f)) / (2 * r.h);
      double s = 0;
      s = std::max(s, detail::min_scale([&](double a) { return (1 + a) * ref.f_at(t0 + (1 + a) * dt) - v; }));
      s = std::max(s, detail::min_scale([&](double a) { return v - (1 - a) * ref.f_at(t0 + (1 - a) * dt); }));
      s = std::max(s, detail::min_scale([&](double a) { return (1 + a) * ref.f0_at(t0 + (1 + a) * dt) - v0; }));
      s = std::max(s, detail::min_scale([&](double a) { return v0 - (1 - a) * ref.f0_at(t0 + (1 - a) * dt); }));
      s = std::max(s, detail::min_scale([&](double a) { return a * (1 + ref.f_at(t0 + (1 + a) * dt)) - rxi; }));
      s = std::max(s, detail::min_scale([&](double a) { return rxi + a * (1 + ref.f_at(t0 + (1 - a) * dt)); }));
      C = std::max(C, s / wx);
      if (dt > 0) {
        const double H = composite_point(p, r.d, w, w.g[j]).H;
        Cb = std::max(Cb, std::abs(H - w.t) / dt / wx);
      }
    }
    e.times.push_back(w.t);
    e.C_hat.push_back(C);
    if (dt > 0) e.C_bg.push_back(Cb);
  }
  e.C_t0 = e.C_hat.front();
  e.C_max = *std::max_element(e.C_hat.begin(), e.C_hat.end());
  e.drift = e.C_t0 > 0 ? e.C_max / e.C_t0 : std::numeric_limits<double>::infinity();
  if (!e.C_bg.empty()) {
    e.C_bg_first = e.C_bg.front();
    e.C_bg_max = *std::max_element(e.C_bg.begin(), e.C_bg.end());
    e.C_bg_min = *std::min_element(e.C_bg.begin(), e.C_bg.end());
    e.drift_bg = e.C_bg_min > 0 ? e.C_bg_max / e.C_bg_min : std::numeric_limits<double>::infinity();
  }
  e.log_C_paper = std::log(e.C_t0) - 2 * std::log(p.sigma0) + 100 / p.delta0;

  Margins M;
  for (std::size_t i = 0; i < r.stream.size(); ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (tags[i][j] == Region::KI) {
        const double wx = envelope_weight(r.x[j]);
        cell_margins(r.stream[i], j, 2 * e.C_t0 * wx, 2 * e.C_bg_first * wx, M);
      }
  e.min_margin_rho = M.rho;
  e.min_margin_rho0 = M.rho0;
  e.min_margin_rhoi = M.rhoi;
  e.min_margin_bg = M.bg;
  return e;
}

// ---- composite substitutions ----

struct CompositeSup {
  double core = 0;      // sup of the bracketed factor
  double log_sup = -std::numeric_limits<double>::infinity();  // ln sup of the full variable
};

struct SubstitutionReport {
  CompositeSup u0, ui, u, v, B, z;
  std::size_t cells = 0;
};

inline SubstitutionReport substitution_diagnostics(const SimResult& r, const Geometry& geo) {
  SubstitutionReport s;
  const auto& p = r.p;
  const auto& d = r.d;
  const auto tags = tag_stream(r, geo);
  const std::size_t m = r.x.size();
  auto acc = [](CompositeSup& c, double core, double lpre) {
    const double a = std::abs(core);
    c.core = std::max(c.core, a);
    if (a > 0) c.log_sup = std::max(c.log_sup, std::log(a) + lpre);
  };
  for (std::size_t i = 0; i < r.stream.size(); ++i) {
    const auto& w = r.stream[i];
    for (std::size_t j = 0; j < m; ++j) {
      if (tags[i][j] != Region::KI) continue;
      ++s.cells;
      const double g = w.g[j], x = r.x[j];
      const auto c = composite_point(p, d, w, g);
      // 1/mu and 1/eta at zeta~ = x + (200/(101A)) ln(-g)
      const double lmu = 303 / p.delta0 + 300 / p.A * std::log(-g) + 151.5 * x - std::log(p.sigma0);
      const double leta = lmu - std::log(p.sigma0);
      const double rl = j > 0 ? w.rho[j - 1] : w.f, rr = j + 1 < m ? w.rho[j + 1] : w.f;
      const double gl = j > 0 ? w.g[j - 1] : w.g_hom, gr = j + 1 < m ? w.g[j + 1] : w.g_hom;
      const double rho_x = (rr - rl) / (2 * r.h), g_x = (gr - gl) / (2 * r.h);
      const double hj = -g_x / g_field_rhs(p, d, w.t, w.rho[j], g);
      acc(s.u0, (w.rho_t[j] - c.f0) / c.f0, lmu);
      acc(s.ui, rho_x / (1 + c.f), lmu);
      acc(s.u, (w.rho[j] - c.f) / c.f, 0.0);
      acc(s.v, (w.rho[j] - c.f) / c.f, lmu);
      acc(s.B, d.B * c.f0 / (c.chi * c.f) * hj, lmu);
      acc(s.z, std::sqrt(w.t / c.H) - 1, leta);
    }
  }
  return s;
}

// ---- convergence ----

struct ConvergenceReport {
  std::vector<std::size_t> cells;
  std::vector<double> diffs;  // max |rho_N - rho_2N| on the coarse nodes at T
  double ratio = 0;
};

inline ConvergenceReport convergence_study(const ParameterSet& p, const DerivedConstants& d,
                                           const PerturbationProfile& prof, SimOptions opt,
                                           std::size_t base_cells = 2048) {
  ConvergenceReport c;
  std::vector<std::vector<double>> finals;
  for (std::size_t lev = 0; lev < 3; ++lev) {
    opt.grid.cells = base_cells << lev;
    opt.grid.snapshot_every = std::numeric_limits<std::size_t>::max();
    const auto r = simulate(p, d, prof, opt);
    c.cells.push_back(opt.grid.cells);
    finals.push_back(r.stream.back().rho);
  }
  for (std::size_t lev = 0; lev + 1 < 3; ++lev) {
    const auto& a = finals[lev];
    const auto& b = finals[lev + 1];
    double mx = 0;
    for (std::size_t j = 0; j < a.size(); ++j) mx = std::max(mx, std::abs(a[j] - b[2 * j + 1]));
    c.diffs.push_back(mx);
  }
  c.ratio = c.diffs[0] / c.diffs[1];
  return c;
}

}  // namespace blowup
