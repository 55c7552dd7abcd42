#include <gtest/gtest.h>

#include <cmath>

#include "blowup/reference_ode.hpp"

using namespace blowup;

namespace {

OdeOptions blowup_opts() {
  OdeOptions o;
  o.samples = 1024;
  return o;
}

// f0 recomputed from f and g through B^{-1} t^{-a} (-g)^{-b/A} (1+f)^c
double f0_closed(const ParameterSet& p, const DerivedConstants& d, double t, double f, double lg) {
  return std::pow(t, -p.a) * std::exp(-lg * p.b / p.A) * std::pow(1.0 + f, p.c) / d.B;
}

}  // namespace

TEST(Integrate, InitialConditionReproduced) {
  const ParameterSet p;
  const auto d = derive_constants(p);
  const auto tr = integrate(p, d, blowup_opts());
  ASSERT_FALSE(tr.times.empty());
  EXPECT_EQ(tr.times.front(), p.t0);
  EXPECT_EQ(tr.f.front(), p.beta);
  EXPECT_EQ(tr.f0.front(), p.beta0);
  EXPECT_EQ(tr.g_comp.front(), -1.0);
}

TEST(Integrate, BlowupBracketInsidePredictedWindow) {
  const ParameterSet p;
  const auto d = derive_constants(p);
  const auto tr = integrate(p, d, blowup_opts());
  ASSERT_TRUE(tr.capped);
  ASSERT_TRUE(tr.blowup_bracket.has_value());
  const auto [lo, hi] = *tr.blowup_bracket;
  EXPECT_LT(lo, hi);
  EXPECT_TRUE(tr.bracket_within_width);
  EXPECT_GE(lo, d.t_star);
  EXPECT_LT(hi, *d.t_upper);
  // frozen from a tightened-tolerance run
  EXPECT_NEAR(0.5 * (lo + hi), 2.66608, 1e-3);
}

TEST(Integrate, SlopeClosedFormResidual) {
  const ParameterSet p;
  const auto d = derive_constants(p);
  const auto tr = integrate(p, d, blowup_opts());
  double worst = 0;
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    const double cf = f0_closed(p, d, tr.times[i], tr.f[i], tr.log_neg_g[i]);
    worst = std::max(worst, std::abs(tr.f0[i] - cf) / std::abs(cf));
  }
  EXPECT_LT(worst, 1e-8);
}

TEST(Integrate, QuadratureFormOfCompactifiedTime) {
  const ParameterSet p;
  const auto d = derive_constants(p);
  OdeOptions o = blowup_opts();
  o.cap = 1e6;
  const auto tr = integrate(p, d, o);
  double worst = 0;
  for (std::size_t i = 0; i < tr.times.size(); ++i)
    worst = std::max(worst, std::abs(tr.g_comp[i] - tr.g_quad[i]) / std::abs(tr.g_quad[i]));
  EXPECT_LT(worst, 1e-8);
}

TEST(Integrate, MonotoneTrace) {
  const ParameterSet p;
  const auto d = derive_constants(p);
  const auto tr = integrate(p, d, blowup_opts());
  for (std::size_t i = 1; i < tr.times.size(); ++i) {
    EXPECT_GT(tr.times[i], tr.times[i - 1]);
    EXPECT_GT(tr.f[i], tr.f[i - 1]);
    EXPECT_GT(tr.g_comp[i], tr.g_comp[i - 1]);
    EXPECT_LT(tr.g_comp[i], 0.0);
    EXPECT_GT(tr.f0[i], 0.0);
  }
}

TEST(Integrate, FixedHorizonTimeSampling) {
  const ParameterSet p;
  const auto d = derive_constants(p);
  OdeOptions o;
  o.t_end = 2.0;
  o.mode = SampleMode::Time;
  o.samples = 101;
  const auto tr = integrate(p, d, o);
  ASSERT_EQ(tr.times.size(), 101u);
  EXPECT_NEAR(tr.times.back(), 2.0, 1e-14);
  EXPECT_NEAR(tr.times[50], 1.5, 1e-14);
  EXPECT_FALSE(tr.capped);
  EXPECT_FALSE(tr.blowup_bracket.has_value());
}

TEST(Integrate, ToleranceRefinementConverges) {
  const ParameterSet p;
  const auto d = derive_constants(p);
  OdeOptions o;
  o.t_end = 2.5;
  o.mode = SampleMode::Time;
  o.samples = 2;
  o.rtol = 1e-8;
  o.atol = 1e-10;
  const double f1 = integrate(p, d, o).f.back();
  o.rtol = 1e-9;
  o.atol = 1e-11;
  const double f2 = integrate(p, d, o).f.back();
  o.rtol = 1e-12;
  o.atol = 1e-14;
  const double fref = integrate(p, d, o).f.back();
  // the 10x refinement moves f(t_end) by much less than the coarse error
  const double coarse_err = std::abs(f1 - fref);
  EXPECT_LT(std::abs(f2 - fref), coarse_err);
  EXPECT_LT(std::abs(f2 - f1), 2 * coarse_err);
}

TEST(Integrate, ReachesTinyCompactifiedTime) {
  const ParameterSet p;
  const auto d = derive_constants(p);
  OdeOptions o;
  o.cap = std::numeric_limits<double>::max();
  o.tau_stop = 1e-8;
  o.samples = 512;
  const auto tr = integrate(p, d, o);
  EXPECT_NEAR(tr.log_neg_g.back(), std::log(1e-8), 1e-9);
  EXPECT_GT(tr.f.back(), 1e20);
}

TEST(Envelope, AllMarginsNonNegative) {
  const ParameterSet p;
  const auto d = derive_constants(p);
  const auto tr = integrate(p, d, blowup_opts());
  const auto r = envelope_check(tr, p, d);
  EXPECT_GT(r.upper_points, 0u);
  EXPECT_TRUE(r.improved_thm_active);
  EXPECT_TRUE(r.improved_d_active);
  EXPECT_GE(r.lower, -1e-9);
  EXPECT_GE(r.upper, -1e-9);
  EXPECT_GE(r.improved_d, -1e-9);
  EXPECT_GE(r.improved_thm, -1e-9);
  EXPECT_TRUE(r.all_ok());
}

TEST(Envelope, HoldsAcrossDataSweep) {
  for (double beta : {0.5, 1.0, 2.0})
    for (double scale : {1.0, 1.5, 3.0}) {
      ParameterSet p;
      p.beta = beta;
      p.beta0 = scale * std::sqrt(a1_rhs(p));
      const auto d = derive_constants(p);
      const auto tr = integrate(p, d, blowup_opts());
      EXPECT_TRUE(envelope_check(tr, p, d).all_ok()) << "beta=" << beta << " scale=" << scale;
    }
}

TEST(EstimateBlowup, InsideBracketAndCapStable) {
  const ParameterSet p;
  const auto d = derive_constants(p);
  std::vector<BlowupEstimate> est;
  double prev_width = std::numeric_limits<double>::infinity();
  for (double cap : {1e6, 1e8, 1e10}) {
    OdeOptions o = blowup_opts();
    o.cap = cap;
    const auto tr = integrate(p, d, o);
    const auto e = estimate_blowup_time(tr);
    EXPECT_GE(e.t_m, tr.blowup_bracket->first);
    EXPECT_LE(e.t_m, tr.blowup_bracket->second);
    const double w = tr.blowup_bracket->second - tr.blowup_bracket->first;
    EXPECT_LE(w, prev_width);
    prev_width = w;
    est.push_back(e);
  }
  for (std::size_t i = 1; i < est.size(); ++i)
    EXPECT_LE(std::abs(est[i].t_m - est[i - 1].t_m), est[i].error + est[i - 1].error);
}

TEST(EstimateBlowup, NonBlowupTraceRejected) {
  ParameterSet p;
  p.beta0 = 1.0;
  const auto d = derive_constants(p, {1e9, 1e-12, 4000});
  OdeOptions o;
  o.t_end = 3.0;
  o.mode = SampleMode::Time;
  const auto tr = integrate(p, d, o);
  try {
    estimate_blowup_time(tr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.tag(), "InsufficientTail");
  }
}
