#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <thread>
#include <tuple>
#include <vector>

#include "compactified_time.hpp"
#include "errors.hpp"
#include "numerics.hpp"
#include "params.hpp"

namespace blowup {

// Constant blocks of the zoomed system. Zoom parameters are fixed:
// k = 1, kappa_i = -101 delta_i^1, c^i = -delta^i_1/101, omega = theta = 3/2,
// p = -200, d^i = 0, l0 = 2.
struct FuchsianConstants {
  double a = 0, b = 0, m2 = 0, l0 = 2, q = 0;
  double D11 = 0, D12_1 = 0, D15 = 0, D16 = 0, D21 = 0, D22 = 0, D24 = 0, D31 = 0, D33 = 0, D35 = 0, D42 = 0,
         D44 = 0, D55 = 0, D66 = 0;
  // symmetric-part entries
  double As12_1 = 0, As13 = 0, As15 = 0, As24 = 0, As35 = 0;

  static constexpr double zoom_shift = 200.0 / 101.0;  // p c^1
  static constexpr double mu_rate = 303.0 / 2.0;
};

inline FuchsianConstants fuchsian_constants(double a, double b, double m2, double l0 = 2.0) {
  FuchsianConstants c;
  c.a = a;
  c.b = b;
  c.m2 = m2;
  c.l0 = l0;
  c.q = q_magnitude(b, m2);
  c.D11 = 300 - 7 * b;
  c.D12_1 = (-4 + (4 - 6 * b) * m2) * c.q + 606;
  c.D15 = l0 * b * (9 * a - 16);
  c.D16 = 12 * b;
  c.D21 = 606;
  c.D22 = 300 + 6 * b;
  c.D24 = 6 * b * (b + 6 * a * b);
  c.D31 = -12 * b;
  c.D33 = 20 * b;
  c.D35 = -12 * b * l0 * (2 - a);
  c.D42 = 2.0 / 3.0;
  c.D44 = b + 300;
  c.D55 = 300;
  c.D66 = 20 * b + 600;
  c.As12_1 = (-2 + (2 - 3 * b) * m2) * c.q + 606;
  c.As13 = -6 * b;
  c.As15 = (9 * a - 16) * l0 * b / 2;
  c.As24 = 3 * b * (b + 6 * a * b) + 1.0 / 3.0;
  c.As35 = -6 * b * l0 * (2 - a);
  return c;
}

// C^2 quintic smoothstep: 0 for zeta <= -2/delta0, 1 for zeta >= -1/delta0
inline double cutoff_phi(double zeta1, double delta0) {
  const double s = std::clamp((zeta1 + 2.0 / delta0) * delta0, 0.0, 1.0);
  return s * s * s * (s * (6 * s - 15) + 10);
}

inline double log_mu(double zeta1, double sigma0, double delta0) {
  return std::log(sigma0) - 303.0 / delta0 - FuchsianConstants::mu_rate * zeta1;
}

// phi mu and phi eta; zero wherever the cutoff vanishes
inline std::pair<double, double> damped_mu_eta(double zeta1, double sigma0, double delta0) {
  const double phi = cutoff_phi(zeta1, delta0);
  if (phi == 0.0) return {0.0, 0.0};
  const double mu = std::exp(log_mu(zeta1, sigma0, delta0));
  return {phi * mu, phi * sigma0 * mu};
}

// Reference-solution values the matrices need at one tau.
struct BasePoint {
  double tau = -1, S = 1, chi_over_B = 4, f = 1;
};

inline BasePoint base_point(const CompactifiedTrace& ct, double tau) {
  BasePoint bp;
  bp.tau = tau;
  bp.S = ct.field_at(ct.S, tau);
  bp.chi_over_B = ct.field_at(ct.chi_up, tau) / ct.d.B;
  bp.f = ct.field_at(ct.f_tau, tau);
  return bp;
}

// Layout of U in R^{4+2n}: u0 | u_j (n) | u | B_l (n) | z | v
struct StateLayout {
  std::size_t n = 1;
  std::size_t dim() const { return 4 + 2 * n; }
  std::size_t u0() const { return 0; }
  std::size_t uj(std::size_t j) const { return 1 + j; }
  std::size_t u() const { return n + 1; }
  std::size_t Bl(std::size_t l) const { return n + 2 + l; }
  std::size_t z() const { return 2 * n + 2; }
  std::size_t v() const { return 2 * n + 3; }
};

// Remainder blocks vanish at U = 0 and are otherwise unwritten; they are
// modelled as L |U| times a fixed symmetric matrix of unit spectral norm.
struct RemainderModel {
  double L = 1.0;
  Matrix operator()(const std::vector<double>& U) const {
    const std::size_t m = U.size();
    Matrix r(m);
    double nrm = 0;
    for (double x : U) nrm += x * x;
    nrm = std::sqrt(nrm);
    if (nrm == 0.0 || L == 0.0) return r;
    for (auto& x : r.v) x = L * nrm / double(m);
    return r;
  }
};

struct FuchsianEval {
  std::size_t n = 1;
  std::vector<double> U;
  double phi = 0, mu = 0, eta = 0, phimu = 0, phieta = 0;
  double L_script = 0;  // the L correction to S
  Matrix A0, A, Asym;
  std::vector<Matrix> Ai;
  std::vector<double> eig_A0, eig_Asym;
  std::vector<double> minors;  // leading principal minors of A0 + q A^1 (see boundary_matrix)
};

// L(tau; u0, u, z) with c = 4/3, k = 1
inline double L_script(const ParameterSet& p, const BasePoint& bp, double u0, double u, double z, double l0 = 2.0) {
  const double fr = bp.f / (1 + bp.f);
  const double s = 1 + fr * u;
  return p.m2 * ((1 + u0) * (1 + u0) / (s * s) - 1) +
         4 * (p.k - p.m2) / bp.chi_over_B * (1 + 1 / bp.f) * (s / std::pow(1 + z, 2 * l0) - 1);
}

inline Matrix boundary_matrix(const FuchsianEval& e, double q) { return e.A0 + q * e.Ai.front(); }

inline FuchsianEval assemble(const ParameterSet& p, const BasePoint& bp, std::vector<double> U, double zeta1,
                             std::size_t n = 1, const RemainderModel& rem = {}, double q_normal = 0.0) {
  if (!detail::main_structure(p)) throw unsupported_parameters("the Fuchsian form needs c = 4/3 and k = 1");
  const StateLayout L{n};
  const std::size_t m = L.dim();
  if (U.empty()) U.assign(m, 0.0);
  if (U.size() != m) throw config_error("state U must have 4+2n components");

  const auto K = fuchsian_constants(p.a, p.b, p.m2);
  FuchsianEval e;
  e.n = n;
  e.U = U;
  e.phi = cutoff_phi(zeta1, p.delta0);
  e.mu = std::exp(log_mu(zeta1, p.sigma0, p.delta0));
  e.eta = p.sigma0 * e.mu;
  std::tie(e.phimu, e.phieta) = damped_mu_eta(zeta1, p.sigma0, p.delta0);
  e.L_script = L_script(p, bp, U[L.u0()], U[L.u()], U[L.z()], K.l0);
  const Matrix Z = rem(U);
  const double SL = bp.S + e.L_script;
  const double R = SL * bp.f / (1 + bp.f) * bp.chi_over_B;

  e.A0 = Matrix(m);
  e.A0(0, 0) = 1;
  for (std::size_t j = 0; j < n; ++j) {
    e.A0(L.uj(j), L.uj(j)) = SL;
    e.A0(0, L.uj(j)) = e.A0(L.uj(j), 0) = e.phimu * R * U[L.Bl(j)];
    e.A0(L.Bl(j), L.Bl(j)) = 1;
  }
  e.A0(L.u(), L.u()) = 2;
  e.A0(L.z(), L.z()) = 1;
  e.A0(L.v(), L.v()) = 2;

  for (std::size_t i = 0; i < n; ++i) {
    Matrix Ai(m);
    const double d1 = i == 0 ? 1.0 : 0.0;
    Ai(0, 0) = 200.0 / 101.0 * d1;
    for (std::size_t j = 0; j < n; ++j) {
      const double off = (i == j ? bp.S * bp.chi_over_B : 0.0) + (i == j ? Z(0, L.uj(j)) : 0.0);
      Ai(0, L.uj(j)) = Ai(L.uj(j), 0) = off;
      Ai(L.uj(j), L.uj(j)) = 200.0 / 101.0 * d1 * SL;
      Ai(L.Bl(j), L.Bl(j)) = 200.0 / 101.0 * d1;
    }
    Ai(L.u(), L.u()) = 400.0 / 101.0 * d1;
    Ai(L.z(), L.z()) = 200.0 / 101.0 * d1;
    Ai(L.v(), L.v()) = 400.0 / 101.0 * d1;
    e.Ai.push_back(Ai);
  }

  const double s0 = p.sigma0;  // eta / mu
  Matrix A(m);
  A(0, 0) = K.D11;
  A(0, L.uj(0)) = K.D12_1;
  A(0, L.z()) = s0 * K.D15;
  A(0, L.v()) = K.D16;
  A(L.uj(0), 0) = K.D21;
  for (std::size_t k = 0; k < n; ++k) {
    A(L.uj(k), L.uj(k)) = K.D22;
    A(L.uj(k), L.Bl(k)) = K.D24;
    A(L.Bl(k), L.uj(k)) = K.D42;
    A(L.Bl(k), L.Bl(k)) = K.D44;
  }
  A(L.u(), 0) = e.phimu * K.D31;
  A(L.u(), L.u()) = K.D33;
  A(L.u(), L.z()) = e.phieta * K.D35;
  A(L.z(), L.z()) = K.D55;
  A(L.v(), 0) = K.D31;
  A(L.v(), L.z()) = s0 * K.D35;
  A(L.v(), L.v()) = K.D66;
  e.A = A + Z;
  e.Asym = e.A.sym();

  e.eig_A0 = jacobi_eigenvalues(e.A0);
  e.eig_Asym = jacobi_eigenvalues(e.Asym);
  e.minors = leading_minors(e.A0 + q_normal * e.Ai.front());
  return e;
}

// ---- H5 certification ----

struct SweepBox {
  std::vector<double> a, b, m2;

  // a excludes its lower end 1, where the reference ODE degenerates; m2 excludes 0
  static SweepBox grid(double a_lo, double a_hi, std::size_t na, double b_lo, double b_hi, std::size_t nb,
                       std::size_t nm) {
    SweepBox s;
    for (std::size_t i = 0; i < na; ++i) s.a.push_back(a_lo + (a_hi - a_lo) * double(i + 1) / double(na));
    for (std::size_t i = 0; i < nb; ++i)
      s.b.push_back(nb == 1 ? b_hi : b_lo + (b_hi - b_lo) * double(i) / double(nb - 1));
    for (std::size_t i = 0; i < nm; ++i) s.m2.push_back(double(i + 1) / double(nm));
    return s;
  }
  static SweepBox default_box() { return grid(1.0, 16.0 / 9.0, 16, 1.0 / 6.0, 2.0 / 3.0, 16, 8); }
  std::size_t size() const { return a.size() * b.size() * m2.size(); }
};

struct H5Row {
  double a = 0, b = 0, m2 = 0;
  double lam_min_Asym = 0, lam_max_Asym = 0, lam_min_A0 = 0, lam_max_A0 = 0;
  double S_min = 0, S_max = 0;
  double As12 = 0;  // (1,2) entry of the symmetric part, 0 under the |q| formula
  double kappa = 0, gamma1 = 0, gamma2 = 0;
  double sandwich_margin = 0;  // min of the three gaps below
  double gap_lower = 0;        // lam_min(A0 - 1/gamma1)
  double gap_mid = 0;          // lam_min(A/(kappa A) - A0)
  double gap_upper = 0;        // lam_min(gamma2 - A/(kappa A))
  bool found = true;  // extended search: admissible constants exist
  bool pass = false;
};

struct H5Table {
  std::vector<H5Row> rows;
  bool all_pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const H5Row& r) { return r.pass; });
  }
  const H5Row* first_failure() const {
    for (const auto& r : rows)
      if (!r.pass) return &r;
    return nullptr;
  }
  void require_pass() const {
    if (const H5Row* r = first_failure())
      throw certification_failure("H5 fails at a=" + std::to_string(r->a) + " b=" + std::to_string(r->b) +
                                  " m2=" + std::to_string(r->m2) + " lam_min(Asym)=" + std::to_string(r->lam_min_Asym) +
                                  " margin=" + std::to_string(r->sandwich_margin));
  }
};

struct H5Options {
  std::size_t n = 1;
  std::size_t trace_samples = 2049;
  unsigned threads = 0;  // 0: hardware concurrency
};

namespace detail {

// Range of (1+1/f) B/chi along the reference solution; S = m2 + 4(1-m2) * that.
inline std::pair<double, double> s_shape_range(const ParameterSet& base, double a, double b, std::size_t samples) {
  ParameterSet p = base;
  p.a = a;
  p.b = b;
  // S along t does not depend on A; keep A admissible for small b
  p.A = std::min(base.A, b / (3.0 - 2.0 * p.c));
  // t_star is not needed and need not exist: for a > 5/3 the default beta0 is below the blow-up threshold
  const auto d = derive_closed_forms(p);
  const auto tr = integrate(p, d, compactified_options(samples));
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    const auto pf = point_fields(p, d, tr.times[i], tr.f[i], tr.f0[i], tr.log_neg_g[i]);
    const double s = (1 + 1 / tr.f[i]) * d.B / pf.chi;
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  return {lo, hi};
}

template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = unsigned(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  for (auto& th : pool) th.join();
}

// Eigen-data of one grid cell; extremes over phi mu in {0, sigma0} and S over its range.
inline H5Row h5_cell(const ParameterSet& base, double a, double b, double m2, std::pair<double, double> shape,
                     std::size_t n) {
  ParameterSet p = base;
  p.a = a;
  p.b = b;
  p.m2 = m2;
  p.c = 4.0 / 3.0;
  p.k = 1.0;
  H5Row r;
  r.a = a;
  r.b = b;
  r.m2 = m2;
  r.S_min = m2 + 4 * (1 - m2) * shape.first;
  r.S_max = m2 + 4 * (1 - m2) * shape.second;
  r.lam_min_Asym = std::numeric_limits<double>::infinity();
  r.lam_max_Asym = -r.lam_min_Asym;
  r.lam_min_A0 = r.lam_min_Asym;
  r.lam_max_A0 = r.lam_max_Asym;
  std::vector<Matrix> Asyms, A0s;
  // phi mu ranges over [0, sigma0] on the support of the cutoff; both ends are checked
  for (double S : {r.S_min, r.S_max}) {
    BasePoint bp;
    bp.S = S;
    bp.f = 1e300;  // unused at U = 0
    auto e = assemble(p, bp, {}, 1e6, n, RemainderModel{0.0});
    A0s.push_back(e.A0);
    r.As12 = e.Asym(0, 1);
    for (double pm : {0.0, p.sigma0}) {
      Matrix As = e.Asym;
      const StateLayout Ly{n};
      As(0, Ly.u()) = As(Ly.u(), 0) = pm * fuchsian_constants(a, b, m2).As13;
      As(Ly.u(), Ly.z()) = As(Ly.z(), Ly.u()) = pm * p.sigma0 * fuchsian_constants(a, b, m2).As35;
      Asyms.push_back(As);
    }
  }
  for (const auto& M : Asyms) {
    const auto ev = jacobi_eigenvalues(M);
    r.lam_min_Asym = std::min(r.lam_min_Asym, ev.front());
    r.lam_max_Asym = std::max(r.lam_max_Asym, ev.back());
  }
  for (const auto& M : A0s) {
    const auto ev = jacobi_eigenvalues(M);
    r.lam_min_A0 = std::min(r.lam_min_A0, ev.front());
    r.lam_max_A0 = std::max(r.lam_max_A0, ev.back());
  }
  return r;
}

// The three sandwich gaps, each minimized over the stored extremes of S and phi mu.
inline void sandwich_gaps(const ParameterSet& base, H5Row& r, std::size_t n) {
  ParameterSet p = base;
  p.a = r.a;
  p.b = r.b;
  p.m2 = r.m2;
  p.c = 4.0 / 3.0;
  p.k = 1.0;
  const double cA = 1.0 / (r.kappa * base.A);
  const double inf = std::numeric_limits<double>::infinity();
  r.gap_lower = r.gap_mid = r.gap_upper = inf;
  const StateLayout Ly{n};
  const auto K = fuchsian_constants(r.a, r.b, r.m2);
  Matrix I(Ly.dim());
  for (std::size_t i = 0; i < Ly.dim(); ++i) I(i, i) = 1.0;
  for (double S : {r.S_min, r.S_max}) {
    BasePoint bp;
    bp.S = S;
    bp.f = 1e300;
    const auto e = assemble(p, bp, {}, 1e6, n, RemainderModel{0.0});
    r.gap_lower = std::min(r.gap_lower, jacobi_eigenvalues(e.A0 + (-1.0 / r.gamma1) * I).front());
    for (double pm : {0.0, p.sigma0}) {
      Matrix As = e.Asym;
      As(0, Ly.u()) = As(Ly.u(), 0) = pm * K.As13;
      As(Ly.u(), Ly.z()) = As(Ly.z(), Ly.u()) = pm * p.sigma0 * K.As35;
      r.gap_mid = std::min(r.gap_mid, jacobi_eigenvalues(cA * As + (-1.0) * e.A0).front());
      r.gap_upper = std::min(r.gap_upper, jacobi_eigenvalues(r.gamma2 * I + (-cA) * As).front());
    }
  }
  r.sandwich_margin = std::min({r.gap_lower, r.gap_mid, r.gap_upper});
}

}  // namespace detail

// Closed-form constants: kappa = beta/(3A(4beta+1)), gamma1 = 2/m2, gamma2 = 1800(4beta+1)/beta.
inline H5Table certify_H5(const ParameterSet& base, const SweepBox& box, const H5Options& opt = {}) {
  H5Table t;
  const std::size_t nab = box.a.size() * box.b.size();
  std::vector<std::pair<double, double>> shapes(nab);
  detail::parallel_for(nab, opt.threads, [&](std::size_t k) {
    shapes[k] = detail::s_shape_range(base, box.a[k / box.b.size()], box.b[k % box.b.size()], opt.trace_samples);
  });
  t.rows.resize(box.size());
  const double beta = base.beta;
  detail::parallel_for(box.size(), opt.threads, [&](std::size_t k) {
    const std::size_t im = k % box.m2.size(), iab = k / box.m2.size();
    const double a = box.a[iab / box.b.size()], b = box.b[iab % box.b.size()], m2 = box.m2[im];
    H5Row r = detail::h5_cell(base, a, b, m2, shapes[iab], opt.n);
    r.kappa = beta / (3 * base.A * (4 * beta + 1));
    r.gamma1 = 2 / m2;
    r.gamma2 = 1800 * (4 * beta + 1) / beta;
    detail::sandwich_gaps(base, r, opt.n);
    r.pass = r.lam_min_Asym > 1.0 / 3.0 && r.lam_max_Asym < 600.0 && r.lam_min_A0 >= m2 / 2 &&
             r.lam_max_A0 < 4 + 1 / beta && r.sandwich_margin > 0 && std::abs(r.As12) < 1e-12;
    t.rows[k] = r;
  });
  return t;
}

// Searches constants from the eigenvalue bounds themselves:
// gamma1 = 1/lam_min(A0), kappa = lam_min(Asym)/(A lam_max(A0)), gamma2 = lam_max(Asym)/(kappa A).
inline H5Table certify_H5_extended(const ParameterSet& base, const SweepBox& box, const H5Options& opt = {}) {
  H5Table t;
  if (box.size() == 0) return t;
  const std::size_t nab = box.a.size() * box.b.size();
  std::vector<std::pair<double, double>> shapes(nab);
  detail::parallel_for(nab, opt.threads, [&](std::size_t k) {
    shapes[k] = detail::s_shape_range(base, box.a[k / box.b.size()], box.b[k % box.b.size()], opt.trace_samples);
  });
  t.rows.resize(box.size());
  detail::parallel_for(box.size(), opt.threads, [&](std::size_t k) {
    const std::size_t im = k % box.m2.size(), iab = k / box.m2.size();
    const double a = box.a[iab / box.b.size()], b = box.b[iab % box.b.size()], m2 = box.m2[im];
    H5Row r = detail::h5_cell(base, a, b, m2, shapes[iab], opt.n);
    r.found = r.lam_min_Asym > 0 && r.lam_min_A0 > 0;
    if (r.found) {
      // shrink by a hair so the sandwich is strict
      r.gamma1 = 1.0 / r.lam_min_A0 * (1 + 1e-6);
      r.kappa = r.lam_min_Asym / (base.A * r.lam_max_A0) * (1 - 1e-6);
      r.gamma2 = r.lam_max_Asym / (r.kappa * base.A) * (1 + 1e-6);
      detail::sandwich_gaps(base, r, opt.n);
    }
    r.pass = r.found && r.sandwich_margin > 0;
    t.rows[k] = r;
  });
  return t;
}

// ---- div B order classes ----

struct DivBProbe {
  std::vector<double> neg_tau;
  std::vector<double> theta, a, b, c, d;  // magnitudes per tau
  double slope_theta = 0, slope_a = 0, slope_b = 0, slope_c = 0, slope_d = 0;
  std::vector<double> log_mu_decay;  // ln mu at zeta = 0, 1, 2, 4, 8 (mu itself underflows)
};

inline double max_abs(const Matrix& m) {
  double s = 0;
  for (double x : m.v) s = std::max(s, std::abs(x));
  return s;
}

inline double max_abs(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

// Computable parts of div B at a torus point zeta_hat (set through zeta1 and
// gamma) with U = W = wdir and remainders zeroed. (a), (b), (c) carry 1/tau, (d) is
// d A0/d tau through S(tau), theta is the tau-free block.
inline DivBProbe divB_order_probe(const CompactifiedTrace& ct, const std::vector<double>& neg_taus,
                                  const std::vector<double>& wdir, double zeta1 = 1.0, std::size_t n = 1) {
  const auto& p = ct.p;
  DivBProbe r;
  const double zh = std::atan(p.gamma * zeta1);
  const double gc2 = p.gamma * std::cos(zh) * std::cos(zh);
  const double gcs = -2 * p.gamma * std::cos(zh) * std::sin(zh);
  auto matvec = [](const Matrix& M, const std::vector<double>& x) {
    std::vector<double> y(M.n, 0.0);
    for (std::size_t i = 0; i < M.n; ++i)
      for (std::size_t j = 0; j < M.n; ++j) y[i] += M(i, j) * x[j];
    return y;
  };
  for (double nt : neg_taus) {
    const double tau = -nt;
    const auto bp = base_point(ct, tau);
    const auto e0 = assemble(p, bp, {}, zeta1, n, RemainderModel{0.0});
    r.neg_tau.push_back(nt);
    r.theta.push_back(max_abs(e0.A));
    r.a.push_back(max_abs(matvec(e0.Ai.front(), wdir)) * gc2 / (p.A * nt));
    r.b.push_back(max_abs(matvec(e0.A, wdir)) / (p.A * nt));
    r.c.push_back(max_abs(e0.Ai.front()) * std::abs(gcs) / (p.A * nt));
    // d S / d tau by a centered difference in x = -ln(-tau)
    const double dx = 1e-3, x0 = -std::log(nt);
    const double Sp = ct.field_at(ct.S, -std::exp(-(x0 + dx))), Sm = ct.field_at(ct.S, -std::exp(-(x0 - dx)));
    r.d.push_back(std::abs((Sp - Sm) / (2 * dx)) / nt);  // dS/dtau = dS/dx / (-tau)
  }
  std::vector<double> lx;
  for (double nt : r.neg_tau) lx.push_back(std::log(nt));
  auto slope = [&](const std::vector<double>& y) {
    std::vector<double> ly;
    for (double v : y) ly.push_back(std::log(std::max(v, 1e-300)));
    return ls_slope(lx, ly);
  };
  r.slope_theta = slope(r.theta);
  r.slope_a = slope(r.a);
  r.slope_b = slope(r.b);
  r.slope_c = slope(r.c);
  r.slope_d = slope(r.d);
  for (double z : {0.0, 1.0, 2.0, 4.0, 8.0}) r.log_mu_decay.push_back(log_mu(z, p.sigma0, p.delta0));
  return r;
}

}  // namespace blowup
