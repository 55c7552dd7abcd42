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
#include "numerics.hpp"
#include "params.hpp"
#include "reference_ode.hpp"

namespace blowup {

// ---- coordinate maps ----
// (t,x) -> (tau,zeta) uses the homogeneous g; the zoom shifts zeta by
// (200/(101 A)) ln(-tau) and the torus map is arctan(gamma zeta~).

struct Coord {
  double time, space;
};

// tau = g(t) by inverting the monotone h_up interpolant
inline double g_of_t(const CompactifiedTrace& ct, double t) {
  if (t < ct.h_up.front() || t > ct.h_up.back()) throw domain_exit("g queried outside the traced time range");
  if (t == ct.h_up.front()) return ct.tau.front();
  const auto it = std::lower_bound(ct.h_up.begin(), ct.h_up.end(), t);
  std::size_t i = std::size_t(it - ct.h_up.begin());
  if (ct.h_up[i] == t) return ct.tau[i];
  const double lo = ct.x[i - 1], hi = ct.x[i];
  auto F = [&](double x) { return (*ct.h_interp)(x) - t; };
  boost::uintmax_t it_max = 200;
  const auto r = boost::math::tools::toms748_solve(F, lo, hi, F(lo), F(hi),
                                                    boost::math::tools::eps_tolerance<double>(52), it_max);
  return -std::exp(-0.5 * (r.first + r.second));
}

inline double zoom_shift(double A) { return 200.0 / (101.0 * A); }

inline Coord to_compact(const CompactifiedTrace& ct, Coord tx) { return {g_of_t(ct, tx.time), tx.space}; }
inline Coord from_compact(const CompactifiedTrace& ct, Coord tz) { return {ct.h_up_at(tz.time), tz.space}; }
inline Coord to_zoom(double A, Coord tz) { return {tz.time, tz.space + zoom_shift(A) * std::log(-tz.time)}; }
inline Coord from_zoom(double A, Coord tz) { return {tz.time, tz.space - zoom_shift(A) * std::log(-tz.time)}; }
inline Coord to_torus(double gamma, Coord tz) { return {tz.time, std::atan(gamma * tz.space)}; }
inline Coord from_torus(double gamma, Coord th) { return {th.time, std::tan(th.space) / gamma}; }

// ---- characteristic cone ----

struct ConeTrace {
  std::vector<double> t, radius;  // (t,x) form: the ODE radius state
  std::vector<double> tau, x;     // x = -ln(-tau)
  std::vector<double> zeta_abs;   // (tau,zeta) form: 1 + (2 b_geom/A) x + (1/A) int_0^x Xi
  std::vector<double> xi_integral;
  double b_geom = 0, A = 1;
  double theta = 0;        // sup of the Xi-integral over the trace
  double xi_total = 0;     // Xi-integral at the last sample
  double tail_bound = 0;   // bound on the remaining integral beyond the trace
  double form_mismatch = 0;      // max |radius - zeta_abs|
  double sqrtg_identity = 0;     // max relative defect of the sqrt(g) identity
  double xi_integral_min = 0;

  // beyond the trace the Xi-integral is frozen at its last value
  double radius_at_tau(double tq) const {
    const double xq = -std::log(-tq);
    return radius_at_x(xq);
  }
  double radius_at_x(double xq) const {
    if (xq <= x.back()) return interp_linear(x, zeta_abs, xq);
    return 1 + 2 * b_geom / A * xq + xi_total / A;
  }
  double radius_at_t(double tq) const {
    if (tq < t.front() || tq > t.back()) throw domain_exit("cone radius queried outside the traced time range");
    const auto it = std::upper_bound(t.begin(), t.end(), tq);
    if (it == t.end()) return radius.back();
    const std::size_t i = std::size_t(it - t.begin()) - 1;
    const double w = (tq - t[i]) / (t[i + 1] - t[i]);
    return (1 - w) * radius[i] + w * radius[i + 1];
  }
  // d|zeta|/dx fitted over [x(tq) - w, x(tq) + w]
  double slope_at(double tq, double w = 0.25) const {
    const double xc = -std::log(-tq);
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (std::abs(x[i] - xc) <= w) {
        xs.push_back(x[i]);
        ys.push_back(zeta_abs[i]);
      }
    if (xs.size() < 3) throw domain_exit("too few samples for a cone slope fit");
    return ls_slope(xs, ys);
  }
};

inline ConeTrace cone(const OdeTrace& tr, const CompactifiedTrace& ct) {
  const auto& p = ct.p;
  if (!detail::main_structure(p)) throw unsupported_parameters("the cone identities need c = 4/3 and k = 1");
  if (tr.times.size() != ct.size() || tr.radius.size() != ct.size())
    throw non_monotone_input("ODE and compactified traces are not aligned");
  ConeTrace c;
  c.t = tr.times;
  c.radius = tr.radius;
  c.tau = ct.tau;
  c.x = ct.x;
  c.b_geom = ct.d.b_geom;
  c.A = p.A;
  c.xi_integral = cumulative_trapezoid(ct.x, ct.Xi);
  c.xi_integral_min = *std::min_element(c.xi_integral.begin(), c.xi_integral.end());
  c.theta = *std::max_element(c.xi_integral.begin(), c.xi_integral.end()) / p.A;
  c.xi_total = c.xi_integral.back();
  for (std::size_t i = 0; i < ct.size(); ++i) {
    c.zeta_abs.push_back(1 + 2 * c.b_geom / p.A * ct.x[i] + c.xi_integral[i] / p.A);
    c.form_mismatch = std::max(c.form_mismatch, std::abs(c.zeta_abs[i] - c.radius[i]));
    const double t = ct.h_up[i], f = ct.f_tau[i], f0 = ct.f0_tau[i];
    const double g = p.m2 * f0 * f0 / ((1 + f) * (1 + f)) + 4 * (p.k - p.m2) * (1 + f) / (t * t);
    const double rhs = f0 / (1 + f) * ct.d.B / ct.chi_up[i] * (2 * c.b_geom + ct.Xi[i]);
    c.sqrtg_identity = std::max(c.sqrtg_identity, std::abs(std::sqrt(g) - rhs) / std::sqrt(g));
  }
  // |Xi| <= C' (-tau)^{1/2} on the tail, so the rest of the integral is at most 2 C' (-tau_end)^{1/2}
  double Cp = 0;
  const double x_from = ct.x.back() * 2.0 / 3.0;
  for (std::size_t i = 0; i < ct.size(); ++i)
    if (ct.x[i] >= x_from) Cp = std::max(Cp, std::abs(ct.Xi[i]) / std::sqrt(-ct.tau[i]));
  c.tail_bound = 2 * Cp * std::sqrt(-ct.tau.back()) / p.A;
  return c;
}

// ---- lens hypersurface ----

enum class Branch { Left, Right };
inline const char* branch_name(Branch b) { return b == Branch::Left ? "left" : "right"; }

// Closed forms in the three charts; b is b_geom throughout. Every
// evaluator works with l = ln(-tau) so the surface never underflows.
struct LensSurface {
  double A = 1, delta0 = 0.05, bg = 2, gamma = 1;
  double Xi0 = 0, Xi_sup = 0;
  double cbar = 0;
  double zt_split = 0;  // zeta~ at the branch switch
  double z_split = 0;   // zeta at the branch switch
  double l_split = 0;   // ln(-tau) at the branch switch
  double K = 0;         // 101 Xi0 + 202 b - 200

  double zt_min() const { return -1.0 / delta0; }
  double z_min() const { return -1.0 / delta0; }

  // ln(-T~) per branch, both defined for every zeta~ >= -1/delta0
  double log_T_left(double zt) const {
    return -cbar * 101 * A / (202 * bg - 200) * (1 - 1 / (2 * delta0 * zt + 4)) * (zt + 1 / delta0);
  }
  double log_T_right(double zt) const {
    return -101 * A / (202 * bg - 200) * (1 - 1 / (2 * delta0 * zt + 4)) * (zt + 1 / (2 * delta0));
  }
  Branch branch_tilde(double zt) const {
    if (!(zt >= zt_min() * (1 + 1e-12))) throw branch_mismatch("zeta~ = " + std::to_string(zt) + " lies left of -1/delta0");
    return zt <= zt_split ? Branch::Left : Branch::Right;
  }
  double log_T_tilde(double zt) const {
    return branch_tilde(zt) == Branch::Left ? log_T_left(zt) : log_T_right(zt);
  }
  double T_tilde(double zt) const { return -std::exp(log_T_tilde(zt)); }
  double T_hat(double zh) const { return T_tilde(std::tan(zh) / gamma); }

  // (tau,zeta) chart
  double diamond_left(double z) const {
    const double dz = delta0 * z;
    return dz * K * (dz * K + 4 * (101 * Xi0 + 202 * bg - 50)) +
           4 * (101 * Xi0 * (101 * Xi0 + 404 * bg - 200) + 4 * (10201 * bg * bg - 10100 * bg + 625));
  }
  double diamond_right(double z) const {
    const double dz = delta0 * z;
    return dz * (101 * bg - 100) * (101 * bg * (4 + dz) - 100 * dz) + (40804 * bg - 30300) * bg;
  }
  double log_tau_left(double z) const {
    return A / (400 * delta0 * (Xi0 + 2 * bg)) * std::sqrt(diamond_left(z)) -
           A * (101 * Xi0 + 202 * bg + 50) / (200 * delta0 * (Xi0 + 2 * bg)) -
           A * z * (101 * Xi0 + 202 * bg + 200) / (400 * (Xi0 + 2 * bg));
  }
  double log_tau_right(double z) const {
    return A / (400 * bg * delta0) * std::sqrt(diamond_right(z)) - 101 * A / (200 * delta0) -
           (100 + 101 * bg) * A * z / (400 * bg);
  }
  Branch branch(double z) const {
    if (!(z >= z_min() * (1 + 1e-12))) throw branch_mismatch("zeta = " + std::to_string(z) + " lies left of -1/delta0");
    return z <= z_split ? Branch::Left : Branch::Right;
  }
  double log_tau_Gamma(double z) const { return branch(z) == Branch::Left ? log_tau_left(z) : log_tau_right(z); }
  double tau_Gamma(double z) const { return -std::exp(log_tau_Gamma(z)); }

  // independent evaluation: l = ln(-T~(zeta + shift l)) by bracketed root finding
  double log_tau_Gamma_numeric(double z) const {
    if (!(z >= z_min() * (1 + 1e-12))) throw branch_mismatch("zeta left of -1/delta0");
    const double sh = zoom_shift(A);
    auto F = [&](double l) { return log_T_tilde(z + sh * l) - l; };
    double lo = -(z + 1 / delta0) / sh, hi = 0.0;
    if (!(lo < hi)) return 0.0;
    boost::uintmax_t it = 300;
    const auto r = boost::math::tools::toms748_solve(F, lo, hi, F(lo), F(hi),
                                                      boost::math::tools::eps_tolerance<double>(50), it);
    return 0.5 * (r.first + r.second);
  }

  // inverses of the surface
  double tri_left(double l) const {
    return 4 * K * K * l * l / (A * A) - 1212 * K * l / (A * delta0) + 10201 / (delta0 * delta0);
  }
  double tri_right(double l) const {
    const double r = 101 * bg - 100;
    return 4 * r * r * l * l / (A * A) - 808 * r * l / (A * delta0) + 10201 / (delta0 * delta0);
  }
  Branch branch_of_log(double l) const {
    if (!(l <= 0.0)) throw branch_mismatch("tau outside [-1, 0)");
    return l >= l_split ? Branch::Left : Branch::Right;
  }
  double zeta_tilde_of_log(double l) const {
    if (branch_of_log(l) == Branch::Left)
      return std::sqrt(tri_left(l)) / 404 - K * l / (202 * A) - 5 / (4 * delta0);
    return std::sqrt(tri_right(l)) / 202 - (101 * bg - 100) * l / (101 * A) - 1 / delta0;
  }
  double zeta_of_log(double l) const {
    if (branch_of_log(l) == Branch::Left)
      return std::sqrt(tri_left(l)) / 404 - (101 * Xi0 + 202 * bg + 200) * l / (202 * A) - 5 / (4 * delta0);
    return std::sqrt(tri_right(l)) / 202 - (101 * bg + 100) * l / (101 * A) - 1 / delta0;
  }

  // normal slopes and the monotone weight Q of the right-branch estimate
  double q_left(double zt) const {
    const double s = 2 + zt * delta0;
    return cbar * 101 / (202 * bg - 200) * (1 - 1 / (2 * s * s));
  }
  double q_right(double zt) const {
    const double s = delta0 * zt + 2;
    return 101 / (202 * bg - 200) * (1 - 3 / (4 * s * s));
  }
  double q(double zt) const { return branch_tilde(zt) == Branch::Left ? q_left(zt) : q_right(zt); }
  double Q(double zt) const {
    const double s = delta0 * zt + 2;
    return s * s * std::exp(-101 * A / (4 * (202 * bg - 200)) * (zt - zt_split));
  }
  double Q_split_closed() const {
    const double v = 303 * Xi0 + 202 * bg - 200;
    return v * v / (40804 * Xi0 * Xi0);
  }
  // closed-form split in the (tau,zeta) chart
  double z_split_closed() const {
    return (-303 * Xi0 * Xi0 + 404 * bg * Xi0 + 404 * bg * bg - 400 * bg) /
           (delta0 * Xi0 * (606 * Xi0 + 404 * bg - 400));
  }
};

struct LensPreconditions {
  double delta_Q = 0;  // 303 A / (32 (101 b - 100))
  double delta_P = 909.0 / 8.0;
  bool ok = false;
};

inline LensPreconditions lens_preconditions(double A, double bg, double delta0) {
  LensPreconditions r;
  r.delta_Q = 303 * A / (32 * (101 * bg - 100));
  r.ok = 101 * bg - 100 > 0 && delta0 > 0 && delta0 < r.delta_Q && delta0 <= r.delta_P;
  return r;
}

inline LensSurface lens_surface(const ParameterSet& p, const DerivedConstants& d, const CompactifiedTrace& ct) {
  if (!detail::main_structure(p) || !ct.has_Xi()) throw unsupported_parameters("the lens needs c = 4/3 and k = 1");
  LensSurface L;
  L.A = p.A;
  L.delta0 = p.delta0;
  L.bg = d.b_geom;
  L.gamma = p.gamma;
  const auto pre = lens_preconditions(p.A, L.bg, p.delta0);
  if (!pre.ok)
    throw config_error("delta0 = " + std::to_string(p.delta0) + " must lie below " + std::to_string(pre.delta_Q) +
                       " and 909/8");
  L.Xi0 = ct.Xi.front();
  L.Xi_sup = *std::max_element(ct.Xi.begin(), ct.Xi.end());
  if (!(L.Xi0 > 0)) throw config_error("Xi(t0) must be positive for the lens construction");
  L.K = 101 * L.Xi0 + 202 * L.bg - 200;
  L.cbar = 1 / (1 + 101 * L.Xi0 / (202 * L.bg - 200));
  L.zt_split = (202 * L.bg - 200 - 101 * L.Xi0) / (202 * L.Xi0 * L.delta0);
  L.l_split = -p.A * (101 * L.Xi0 + 101 * L.bg - 100) / (L.delta0 * L.Xi0 * (303 * L.Xi0 + 202 * L.bg - 200));
  L.z_split = L.z_split_closed();
  return L;
}

// Right end of the sampled surface: the zeta whose tau_Gamma hits the trace end.
inline double lens_zeta_max(const LensSurface& L, const CompactifiedTrace& ct) {
  return L.zeta_of_log(-ct.x.back() * (1 - 1e-9));
}

// (t,x) chart: T(x) = h_up(tau_Gamma(x)); t0 left of the surface, t_last past the trace
inline double lens_time(const LensSurface& L, const CompactifiedTrace& ct, double x) {
  if (x <= L.z_min()) return ct.h_up.front();
  const double l = L.log_tau_Gamma(x);
  if (-l >= ct.x.back()) return ct.h_up.back();
  return ct.h_up_at(-std::exp(l));
}

// inverse of the (t,x) form: x = X(g)
inline double lens_X_of_g(const LensSurface& L, double g) { return L.zeta_of_log(std::log(-g)); }

// ---- weakly spacelike check ----

struct MinorSample {
  double zeta = 0, zeta_tilde = 0, tau_Gamma = 0, log_neg_tau = 0;
  Branch branch = Branch::Left;
  double q = 0;
  double D2 = 0;          // from the assembled boundary matrix
  double D2_closed = 0;   // S [(1 + 200q/101)^2 - q^2 (2b + Xi)^2]
  double D2_lower = 0;    // D2 less the remainder envelope
  double min_minor = 0;
  double Xi = 0;
  double log_envelope = 0;  // ln of the remainder envelope
  double decay_margin = 0;
  double right_bound = 0;  // S eps_r (1 + q_r (2b + 200/101)), right branch only
};

struct MinorReport {
  std::vector<MinorSample> rows;
  double min_D2 = std::numeric_limits<double>::infinity();
  double min_minor = std::numeric_limits<double>::infinity();
  double max_closed_gap = 0;  // |D2 - D2_closed| / (1 + |D2|)
  bool ok = true;
};

struct SpacelikeOptions {
  std::size_t samples_per_branch = 64;
  double tol = 1e-10;
  double envelope_C = 1.0;  // existential constant of the remainder envelope
  double sigma = 1e-6;      // surrogate for the smallness parameter
  bool throw_on_fail = true;
};

// ln e^{-100/delta0} e^{-3 zeta/4} - ln e^{-303/delta0} (-tau)^{-300/A} e^{-303 zeta/2}
inline double decay_log_margin(double A, double delta0, double l, double z) {
  return (-100 / delta0 - 0.75 * z) - (-303 / delta0 - 300 / A * l - 151.5 * z);
}

inline MinorSample minor_sample(const ParameterSet& p, const LensSurface& L, const CompactifiedTrace& ct, double zt,
                                const SpacelikeOptions& opt) {
  MinorSample s;
  s.zeta_tilde = zt;
  s.branch = L.branch_tilde(zt);
  s.log_neg_tau = L.log_T_tilde(zt);
  s.tau_Gamma = -std::exp(s.log_neg_tau);
  s.zeta = zt - zoom_shift(L.A) * s.log_neg_tau;
  s.q = L.q(zt);
  const auto bp = base_point(ct, s.tau_Gamma);
  const auto e = assemble(p, bp, {}, s.zeta, 1, RemainderModel{0.0}, s.q);
  s.D2 = e.minors.at(1);
  s.min_minor = *std::min_element(e.minors.begin(), e.minors.end());
  s.Xi = ct.field_at(ct.Xi, s.tau_Gamma);
  const double a = 1 + 200 * s.q / 101, w = 2 * L.bg + s.Xi;
  s.D2_closed = bp.S * (a * a - s.q * s.q * w * w);
  s.log_envelope = std::log(opt.envelope_C * p.sigma0 * opt.sigma) - 303 / L.delta0 - 151.5 * zt;
  const double env = std::exp(s.log_envelope);
  const double off = s.q * bp.S * bp.chi_over_B;
  s.D2_lower = s.D2 - a * a * env - 2 * std::abs(off) * env - env * env;
  s.decay_margin = decay_log_margin(L.A, L.delta0, s.log_neg_tau, s.zeta);
  if (s.branch == Branch::Right) {
    const double v = L.delta0 * zt + 2, eps = 3 / (4 * v * v);
    s.right_bound = bp.S * eps * (1 + s.q * (2 * L.bg + 200.0 / 101.0));
  }
  return s;
}

inline std::vector<double> lens_zeta_tilde_samples(const LensSurface& L, const CompactifiedTrace& ct,
                                                   std::size_t per_branch) {
  std::vector<double> out;
  const double zl = L.zt_min(), zs = L.zt_split;
  const double zr = L.zeta_tilde_of_log(-ct.x.back() * (1 - 1e-9));
  for (std::size_t i = 0; i < per_branch; ++i) out.push_back(zl + (zs - zl) * double(i) / double(per_branch - 1));
  for (std::size_t i = 1; i <= per_branch; ++i) out.push_back(zs + (zr - zs) * double(i) / double(per_branch));
  return out;
}

inline MinorReport spacelike_check(const ParameterSet& p, const LensSurface& L, const CompactifiedTrace& ct,
                                   const SpacelikeOptions& opt = {}) {
  MinorReport r;
  for (double zt : lens_zeta_tilde_samples(L, ct, opt.samples_per_branch)) {
    auto s = minor_sample(p, L, ct, zt, opt);
    r.min_D2 = std::min(r.min_D2, s.D2_lower);
    r.min_minor = std::min(r.min_minor, s.min_minor);
    r.max_closed_gap = std::max(r.max_closed_gap, std::abs(s.D2 - s.D2_closed) / (1 + std::abs(s.D2)));
    const bool bad = s.D2_lower < 0 || s.min_minor < -opt.tol;
    if (bad) {
      r.ok = false;
      if (opt.throw_on_fail) {
        const int idx = s.D2_lower < 0 ? 2 : 0;
        throw minor_negative("minor D" + std::to_string(idx) + " negative at zeta = " + std::to_string(s.zeta) +
                             " (" + branch_name(s.branch) + " branch)");
      }
    }
    r.rows.push_back(s);
  }
  return r;
}

// ---- decay factor ----

struct DecayReport {
  std::size_t samples = 0;
  double min_margin = std::numeric_limits<double>::infinity();  // log-space
  double min_surface_margin = std::numeric_limits<double>::infinity();
  double worst_tau = 0, worst_zeta = 0;
};

// samples (tau, zeta) with -1 <= tau <= tau_Gamma(zeta): nz columns times nt rows
inline DecayReport decay_factor_check(const LensSurface& L, const CompactifiedTrace& ct, std::size_t nz = 40,
                                      std::size_t nt = 25, bool throw_on_fail = true) {
  DecayReport r;
  const double z0 = L.z_min(), z1 = lens_zeta_max(L, ct);
  for (std::size_t i = 0; i < nz; ++i) {
    const double z = z0 + (z1 - z0) * double(i) / double(nz - 1);
    const double lG = L.log_tau_Gamma(z);
    for (std::size_t j = 0; j < nt; ++j) {
      const double l = lG * double(j) / double(nt - 1);
      const double m = decay_log_margin(L.A, L.delta0, l, z);
      ++r.samples;
      if (j + 1 == nt) r.min_surface_margin = std::min(r.min_surface_margin, m);
      if (m < r.min_margin) {
        r.min_margin = m;
        r.worst_tau = -std::exp(l);
        r.worst_zeta = z;
      }
    }
  }
  if (throw_on_fail && !(r.min_margin > 0))
    throw inequality_violated("decay factor inequality fails at tau = " + std::to_string(r.worst_tau) +
                              ", zeta = " + std::to_string(r.worst_zeta));
  return r;
}

// ---- regions ----

enum class Region { H, KI, IminusK, Cone };

inline const char* region_name(Region r) {
  switch (r) {
    case Region::H: return "H";
    case Region::KI: return "KI";
    case Region::IminusK: return "I-K";
    case Region::Cone: return "C";
  }
  return "?";
}

inline Region classify_with_radius(double t, double x, double radius, double T_lens, double band = 1e-9) {
  const double ax = std::abs(x);
  if (std::abs(ax - radius) <= band * radius) return Region::Cone;
  if (ax > radius) return Region::H;
  return t < T_lens ? Region::KI : Region::IminusK;
}

inline Region classify(double t, double x, const ConeTrace& cn, const CompactifiedTrace& ct, const LensSurface& L) {
  return classify_with_radius(t, x, cn.radius_at_t(t), lens_time(L, ct, x));
}

inline std::vector<Region> classify_batch(const std::vector<Coord>& pts, const ConeTrace& cn,
                                          const CompactifiedTrace& ct, const LensSurface& L, unsigned threads = 0) {
  std::vector<Region> out(pts.size());
  detail::parallel_for(pts.size(), threads,
                       [&](std::size_t i) { out[i] = classify(pts[i].time, pts[i].space, cn, ct, L); });
  return out;
}

struct InIReport {
  std::size_t samples = 0, in_I = 0;
  double min_gap = std::numeric_limits<double>::infinity();  // radius - x, > 0 inside
  double worst_x = 0;
  // 1 + Xi-integral / A: the x -> infinity limit of radius - x along the surface
  double asymptotic_gap = 0;
};

// points (T(x), x) on the surface with x >= 0, classified against the cone in the tau chart
inline InIReport inI_check(const LensSurface& L, const ConeTrace& cn, const CompactifiedTrace& ct,
                           std::size_t samples = 32) {
  InIReport r;
  // past the trace end the cone uses the frozen Xi-integral less its tail bound
  const double x1 = std::max(lens_zeta_max(L, ct), 1.0);
  for (std::size_t i = 0; i < samples; ++i) {
    const double x = x1 * double(i) / double(samples - 1);
    const double l = L.log_tau_Gamma(x);
    const double rad = cn.radius_at_tau(-std::exp(l)) - (-l > ct.x.back() ? cn.tail_bound : 0.0);
    ++r.samples;
    const double gap = rad - x;
    if (classify_with_radius(0.0, x, rad, std::numeric_limits<double>::infinity()) != Region::H &&
        gap > 1e-9 * rad)
      ++r.in_I;
    if (gap < r.min_gap) {
      r.min_gap = gap;
      r.worst_x = x;
    }
  }
  r.asymptotic_gap = 1 + cn.xi_total / cn.A;
  return r;
}

}  // namespace blowup
