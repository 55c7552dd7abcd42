#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include "errors.hpp"
#include "params.hpp"

namespace blowup {

// Sample placement for the exported trace.
enum class SampleMode {
  Tau,       // tau_j = -(tau_last)^{j/(N-1)}: geometric in -g toward blow-up
  Time,      // uniform in t over [t0, t_end]
  Explicit,  // caller-supplied increasing list of times
};

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double cap = 1e8;             // blow-up mode stops once f exceeds this
  std::optional<double> t_end;  // fixed-horizon mode when set
  double tau_stop = 0.0;        // also stop once -g <= tau_stop (0 disables)
  double switch_f = 1e4;        // hand over to the w = 1/(1+f) formulation
  double t_max_factor = 1e4;    // give up at t0 * factor without reaching the cap
  std::size_t samples = 2048;
  SampleMode mode = SampleMode::Tau;
  double time_share = 0.0;  // Tau mode: share of the grid spent uniformly in t, in [0, 1)
  std::vector<double> sample_times;  // SampleMode::Explicit
  double bracket_width = 1e-3;
  std::size_t tail_keep = 64;
  std::size_t max_steps = 5'000'000;
};

struct TailPoint {
  double t, w, wdot;  // w = 1/(1+f)
};

struct OdeTrace {
  std::vector<double> times, f, f0, g_comp;
  std::vector<double> log_neg_g;  // ln(-g); keeps precision as g -> 0
  std::vector<double> g_quad;     // g via the quadrature form, an independent state
  std::vector<double> radius;     // 1 + int sqrt(g_wave) dt along f
  std::optional<std::pair<double, double>> blowup_bracket;
  bool bracket_within_width = false;
  bool capped = false;
  std::vector<TailPoint> tail;  // last accepted steps of the w-phase
  double t_last = 0, f_last = 0, log_neg_g_last = 0;
  double t_switch = 0;  // 0 if the w-phase never started
  std::size_t steps = 0;
  double sample_weight = 0;  // w of the tau-mode key x + w (t - t0)
};

namespace detail {

using State = std::array<double, 5>;
namespace odeint = boost::numeric::odeint;
using Dopri = odeint::runge_kutta_dopri5<State>;
using Controlled = odeint::controlled_runge_kutta<Dopri>;
using Dense = odeint::dense_output_runge_kutta<Controlled>;

inline Dense make_dense(double atol, double rtol) {
  using Checker = odeint::default_error_checker<double, odeint::array_algebra, odeint::default_operations>;
  return Dense(Controlled(Checker(atol, rtol, 1.0, 0.0)));
}

struct Coeffs {
  double a, b, c, k, m2, A, B;
};

// Phase 1, independent variable t. State (f, f0, ln(-g), Q, r) with
// Q = int s^{a-2} f (1+f)^{1-c} ds and r the cone radius.
struct TimeSystem {
  Coeffs q;
  void operator()(const State& y, State& dy, double t) const {
    const double f = y[0], f0 = y[1], lg = y[2];
    if (1.0 + f <= 0.0) throw non_positive_denominator("1+f <= 0 at t = " + std::to_string(t));
    const double s = std::pow(t, q.a - 2.0) * f * std::pow(1.0 + f, 1.0 - q.c);
    const double r = f0 / (1.0 + f);
    dy[0] = f0;
    dy[1] = -(q.a / t) * f0 + (q.b / (t * t)) * f * (1.0 + f) + q.c * f0 * f0 / (1.0 + f);
    dy[2] = -q.A * q.B * std::exp(lg * q.b / q.A) * s;
    dy[3] = s;
    dy[4] = std::sqrt(std::max(0.0, q.m2 * r * r + 4.0 * (q.k - q.m2) * (1.0 + f) / (t * t)));
  }
};

// Phase 2, independent variable sigma = -ln(-g). State (t, w, v = dw/dt, Q, r).
struct SigmaSystem {
  Coeffs q;
  void operator()(const State& y, State& dy, double sigma) const {
    const double t = y[0], w = y[1], v = y[2];
    if (w <= 0.0) throw non_positive_denominator("w <= 0 at sigma = " + std::to_string(sigma));
    const double G = q.A * q.B * std::exp(-sigma * q.b / q.A) * std::pow(t, q.a - 2.0) * (1.0 - w) *
                     std::pow(w, q.c - 2.0);
    const double wdd = (2.0 - q.c) * v * v / w - (q.a / t) * v - (q.b / (t * t)) * (1.0 - w);
    const double r = -v / w;
    const double g2 = q.m2 * r * r + 4.0 * (q.k - q.m2) / (w * t * t);
    dy[0] = 1.0 / G;
    dy[1] = v / G;
    dy[2] = wdd / G;
    dy[3] = std::exp(sigma * q.b / q.A) / (q.A * q.B);
    dy[4] = std::sqrt(std::max(0.0, g2)) / G;
  }
};

struct Sample {
  double t, f, f0, lg, Q, r;
};

inline Sample from_time_state(double t, const State& s) { return {t, s[0], s[1], s[2], s[3], s[4]}; }

inline Sample from_sigma_state(double sigma, const State& s) {
  const double w = s[1];
  return {s[0], (1.0 - w) / w, -s[2] / (w * w), -sigma, s[3], s[4]};
}

template <class F>
double bracketed_root(F&& fn, double lo, double hi) {
  const double flo = fn(lo), fhi = fn(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0)) return std::abs(flo) < std::abs(fhi) ? lo : hi;
  boost::uintmax_t it = 200;
  auto [x0, x1] = boost::math::tools::toms748_solve(fn, lo, hi, flo, fhi,
                                                    boost::math::tools::eps_tolerance<double>(52), it);
  return 0.5 * (x0 + x1);
}

struct RunResult {
  bool capped = false;
  double t_switch = 0;
  Sample last{};
  std::vector<TailPoint> tail;
  std::size_t steps = 0;
};

// Drives both phases. The observer sees every accepted segment, clipped to the
// stopping point: obs.time(ta, tb, dense) and obs.sigma(sa, sb, dense).
template <class Obs>
RunResult run(const ParameterSet& p, const DerivedConstants& d, const OdeOptions& opt, Obs& obs) {
  const Coeffs q{p.a, p.b, p.c, p.k, p.m2, p.A, d.B};
  const TimeSystem sys1{q};
  const SigmaSystem sys2{q};
  const double t_stop = opt.t_end ? *opt.t_end : p.t0 * opt.t_max_factor;
  const double lg_stop = opt.tau_stop > 0 ? std::log(opt.tau_stop) : -std::numeric_limits<double>::infinity();
  RunResult res;

  auto st = make_dense(opt.atol, opt.rtol);
  State y{p.beta, p.beta0, 0.0, 0.0, 1.0};
  st.initialize(y, p.t0, 1e-6 * p.t0);
  res.last = from_time_state(p.t0, y);
  try {
    while (true) {
      if (++res.steps > opt.max_steps) throw step_underflow("step budget exhausted in the t-phase");
      auto [ta, tb] = st.do_step(sys1);
      if (tb - ta < 1e-15 * std::abs(tb)) throw step_underflow("t-step collapsed at t = " + std::to_string(tb));
      y = st.current_state();
      double tend = tb;
      bool stop = false;
      if (tb >= t_stop) {
        tend = t_stop;
        stop = true;
      }
      State ye;
      st.calc_state(tend, ye);
      if (ye[2] <= lg_stop) {
        tend = bracketed_root(
            [&](double x) {
              State z;
              st.calc_state(x, z);
              return z[2] - lg_stop;
            },
            ta, tend);
        st.calc_state(tend, ye);
        ye[2] = lg_stop;
        stop = true;
      }
      obs.time(ta, tend, st);
      res.last = from_time_state(tend, ye);
      if (stop) return res;
      if (y[0] > opt.cap) {
        res.capped = true;
        return res;
      }
      if (y[0] > opt.switch_f) break;
    }
  } catch (const odeint::odeint_error& e) {
    throw step_underflow(std::string("t-phase: ") + e.what());
  }

  res.t_switch = res.last.t;
  const double f1 = y[0], f01 = y[1];
  State z{res.last.t, 1.0 / (1.0 + f1), -f01 / ((1.0 + f1) * (1.0 + f1)), y[3], y[4]};
  auto st2 = make_dense(0.0, opt.rtol);
  st2.initialize(z, -y[2], 1e-6);
  try {
    while (true) {
      if (++res.steps > opt.max_steps) throw step_underflow("step budget exhausted in the sigma-phase");
      auto [sa, sb] = st2.do_step(sys2);
      if (sb - sa < 1e-15 * std::abs(sb)) throw step_underflow("sigma-step collapsed");
      z = st2.current_state();
      double send = sb;
      bool stop = false;
      if (sb >= -lg_stop) {
        send = -lg_stop;
        stop = true;
      }
      if (z[0] >= t_stop) {
        send = bracketed_root(
            [&](double x) {
              State u;
              st2.calc_state(x, u);
              return u[0] - t_stop;
            },
            sa, send);
        stop = true;
      }
      State ze;
      st2.calc_state(send, ze);
      obs.sigma(sa, send, st2);
      res.last = from_sigma_state(send, ze);
      if (stop && opt.t_end && z[0] >= t_stop) res.last.t = t_stop;
      res.tail.push_back({ze[0], ze[1], ze[2]});
      if (res.tail.size() > opt.tail_keep) res.tail.erase(res.tail.begin());
      if (stop) return res;
      if ((1.0 - z[1]) / z[1] > opt.cap) {
        res.capped = true;
        return res;
      }
    }
  } catch (const odeint::odeint_error& e) {
    throw step_underflow(std::string("sigma-phase: ") + e.what());
  }
}

struct NullObserver {
  void time(double, double, const Dense&) {}
  void sigma(double, double, const Dense&) {}
};

// Emits samples where a monotone key crosses each target. With tau keying the
// key is x + w (t - t0), x = -ln(-g); w = 0 gives a grid uniform in x and
// w > 0 spends part of the grid on the early stretch where x moves slowly.
// Otherwise the key is t.
struct SampleObserver {
  bool tau_keyed;
  double w = 0, t0 = 0;
  std::vector<double> targets;
  std::vector<Sample> out;
  std::size_t j = 0;

  double key_time(double t, const State& s) const { return tau_keyed ? -s[2] + w * (t - t0) : t; }
  double key_sigma(double sg, const State& s) const { return tau_keyed ? sg + w * (s[0] - t0) : s[0]; }

  template <class Key, class Make>
  void emit(double a, double b, const Dense& st, Key key, Make make, bool direct) {
    State e;
    st.calc_state(b, e);
    const double kend = key(b, e);
    while (j < targets.size() && targets[j] <= kend) {
      const double kt = targets[j];
      double at = kt;
      if (!direct)
        at = bracketed_root(
            [&](double q) {
              State s;
              st.calc_state(q, s);
              return key(q, s) - kt;
            },
            a, b);
      at = std::clamp(at, a, b);
      State s;
      st.calc_state(at, s);
      out.push_back(make(at, s, kt));
      ++j;
    }
  }

  void time(double ta, double tb, const Dense& st) {
    emit(
        ta, tb, st, [&](double t, const State& s) { return key_time(t, s); },
        [](double t, const State& s, double) { return from_time_state(t, s); }, !tau_keyed);
  }
  void sigma(double sa, double sb, const Dense& st) {
    emit(
        sa, sb, st, [&](double sg, const State& s) { return key_sigma(sg, s); },
        [&](double sg, const State& s, double kt) {
          Sample smp = from_sigma_state(sg, s);
          if (!tau_keyed) smp.t = kt;
          return smp;
        },
        tau_keyed && w == 0.0);
  }
};

}  // namespace detail

// Integrates f'' + (a/t) f' - (b/t^2) f (1+f) - c f'^2/(1+f) = 0 with f(t0)=beta,
// f'(t0)=beta0, accumulating ln(-g) alongside. Past f = switch_f the solver
// continues in sigma = -ln(-g) with w = 1/(1+f), which stays resolvable down
// to -g ~ 1e-8 where f ~ 1e30.
inline OdeTrace integrate(const ParameterSet& p, const DerivedConstants& d, const OdeOptions& opt = {}) {
  detail::NullObserver none;
  const detail::RunResult res = detail::run(p, d, opt, none);

  detail::SampleObserver obs;
  obs.tau_keyed = (opt.mode == SampleMode::Tau);
  obs.t0 = p.t0;
  const std::size_t n = std::max<std::size_t>(opt.samples, 2);
  if (opt.mode == SampleMode::Tau) {
    if (opt.time_share > 0 && res.last.t > p.t0)
      obs.w = opt.time_share / (1.0 - opt.time_share) * (-res.last.lg) / (res.last.t - p.t0);
    const double kend = -res.last.lg + obs.w * (res.last.t - p.t0);
    for (std::size_t j = 0; j < n; ++j) obs.targets.push_back(kend * double(j) / double(n - 1));
  } else if (opt.mode == SampleMode::Time) {
    if (!opt.t_end) throw config_error("time sampling needs t_end");
    for (std::size_t j = 0; j < n; ++j) obs.targets.push_back(p.t0 + (*opt.t_end - p.t0) * double(j) / double(n - 1));
  } else {
    obs.targets = opt.sample_times;
    if (!std::is_sorted(obs.targets.begin(), obs.targets.end())) throw config_error("sample_times must increase");
  }
  // the first target sits on the initial point
  std::size_t skip = 0;
  while (skip < obs.targets.size() && obs.targets[skip] <= (obs.tau_keyed ? 0.0 : p.t0)) {
    obs.out.push_back({p.t0, p.beta, p.beta0, 0.0, 0.0, 1.0});
    ++skip;
  }
  obs.j = skip;
  detail::run(p, d, opt, obs);
  // round-off can leave the final target a hair beyond the stop point
  while (obs.out.size() < obs.targets.size() && obs.targets[obs.out.size()] <= (obs.tau_keyed ? -res.last.lg + obs.w * (res.last.t - p.t0) : res.last.t) * (1 + 1e-12) + 1e-12)
    obs.out.push_back(res.last);

  OdeTrace tr;
  tr.sample_weight = obs.w;
  tr.capped = res.capped;
  tr.tail = res.tail;
  tr.t_switch = res.t_switch;
  tr.steps = res.steps;
  tr.t_last = res.last.t;
  tr.f_last = res.last.f;
  tr.log_neg_g_last = res.last.lg;

  // t_lo is the last point reached; t_hi follows from
  // d(w^{c-1})/dt = -(c-1) B^{-1} t^{-a} (-g)^{-b/A}, whose size only grows
  // toward t_m, so w^{c-1} cannot reach 0 before t_lo + w^{c-1} B t_hi^a / ((c-1)(-g)^{-b/A})
  if (res.capped) {
    const double w = 1.0 / (1.0 + res.last.f);
    const double ycomp = std::exp(-res.last.lg * p.b / p.A);
    const double R = std::pow(w, p.c - 1.0) * d.B / ((p.c - 1.0) * ycomp);
    double thi = res.last.t;
    for (int it = 0; it < 500; ++it) {
      const double nx = res.last.t + R * std::pow(thi, p.a);
      const bool done = std::abs(nx - thi) <= 1e-15 * nx;
      thi = nx;
      if (done) break;
    }
    tr.blowup_bracket = std::make_pair(res.last.t, thi);
    tr.bracket_within_width = (thi - res.last.t) < opt.bracket_width;
  }

  tr.times.reserve(obs.out.size());
  for (const auto& s : obs.out) {
    // dense output jitters by an ulp once t has stalled next to t_m
    double t = s.t;
    if (!tr.times.empty() && t < tr.times.back() && tr.times.back() - t <= 1e-14 * std::abs(t)) t = tr.times.back();
    tr.times.push_back(t);
    tr.f.push_back(s.f);
    tr.f0.push_back(s.f0);
    tr.log_neg_g.push_back(s.lg);
    tr.g_comp.push_back(-std::exp(s.lg));
    tr.g_quad.push_back(-std::pow(1.0 + p.b * d.B * s.Q, -p.A / p.b));
    tr.radius.push_back(s.r);
  }
  return tr;
}

struct EnvelopeReport {
  // each margin is the min over sampled t in (t0, .) of (value - bound)/(1+f),
  // oriented so that >= 0 means the inequality holds
  double lower = std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  double improved_d = std::numeric_limits<double>::infinity();    // (1+beta)(1 - E t0^abar + E t^abar)^{1/cbar}
  double improved_thm = std::numeric_limits<double>::infinity();  // bound with breve beta
  bool improved_d_active = false;
  bool improved_thm_active = false;
  std::size_t upper_points = 0;

  bool all_ok(double tol = -1e-9) const {
    return lower >= tol && upper >= tol && (!improved_d_active || improved_d >= tol) &&
           (!improved_thm_active || improved_thm >= tol);
  }
};

inline EnvelopeReport envelope_check(const OdeTrace& tr, const ParameterSet& p, const DerivedConstants& d) {
  EnvelopeReport r;
  r.improved_d_active = blowup_condition(p);
  r.improved_thm_active = d.beta_breve > 0;
  const double kthm = p.beta0 * std::pow(p.t0, p.a) / (3.0 * (p.a - 1.0) * (1.0 + p.beta));
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    const double t = tr.times[i];
    if (t <= p.t0) continue;  // open interval
    const double one_f = 1.0 + tr.f[i];
    r.lower = std::min(r.lower, (one_f - d.lower_envelope(t)) / one_f);
    if (t < d.t_star) {
      // 1+f < 1/den with den > 0 on (t0, t_star)
      const double den = d.upper_denominator(t);
      r.upper = std::min(r.upper, (1.0 - den * one_f) / (den * one_f));
      ++r.upper_points;
    }
    if (r.improved_d_active) {
      const double base = 1.0 - d.Econ * std::pow(p.t0, d.abar) + d.Econ * std::pow(t, d.abar);
      if (base > 0) r.improved_d = std::min(r.improved_d, (one_f - (1.0 + p.beta) * std::pow(base, 1.0 / d.cbar)) / one_f);
    }
    if (r.improved_thm_active) {
      const double base = kthm * std::pow(t, 1.0 - p.a) - d.beta_breve;
      if (base > 0) r.improved_thm = std::min(r.improved_thm, (one_f - (1.0 + p.beta) / (base * base * base)) / one_f);
    }
  }
  return r;
}

struct BlowupEstimate {
  double t_m;
  double error;
};

// Near t_m, w = 1/(1+f) ~ kappa (t_m - t)^2, so each tail point gives
// t_m ~ t + 2 w/|w'| up to a relative O(t_m - t) error. The error bar is the
// spread of the last estimates plus the remaining distance t_m - t.
inline BlowupEstimate estimate_blowup_time(const OdeTrace& tr, std::size_t min_tail = 8) {
  if (!tr.blowup_bracket || tr.tail.size() < min_tail)
    throw insufficient_tail("need a capped blow-up trace with >= " + std::to_string(min_tail) + " tail points, have " +
                            std::to_string(tr.tail.size()));
  std::vector<double> est;
  for (std::size_t i = tr.tail.size() - min_tail; i < tr.tail.size(); ++i) {
    const auto& tp = tr.tail[i];
    if (tp.wdot < 0) est.push_back(tp.t + 2.0 * tp.w / (-tp.wdot));
  }
  if (est.size() < 2) throw insufficient_tail("tail has no decreasing w");
  const auto [mn, mx] = std::minmax_element(est.begin(), est.end());
  BlowupEstimate e{est.back(), (*mx - *mn) + (est.back() - tr.tail.back().t)};
  e.t_m = std::clamp(e.t_m, tr.blowup_bracket->first, tr.blowup_bracket->second);
  return e;
}

}  // namespace blowup
