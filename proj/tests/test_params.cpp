#include <gtest/gtest.h>

#include <boost/math/tools/roots.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/rational.hpp>

#include "blowup/params.hpp"

using namespace blowup;
using R = boost::rational<long long>;
using F50 = boost::multiprecision::cpp_bin_float_50;

namespace {

// Headline point in exact arithmetic: a = 4/3, b = 2/3, beta = 1, beta0 = 4, t0 = 1.
// Delta^2 = (1-a)^2 + 4b = 1/9 + 8/3 = 25/9 is a perfect square, so Acon and
// Bcon are rational too.
struct ExactHeadline {
  R a{4, 3}, b{2, 3}, beta{1}, beta0{4}, t0{1};
  R abar = R(1) - a;
  R tri{5, 3};
  R em = (abar - tri) / 2, ep = (abar + tri) / 2;
  R r1 = beta / (R(1) + beta);
  R r2 = t0 * beta0 / ((R(1) + beta) * (R(1) + beta));
  R Acon = (r2 - ep * r1) / tri;  // t0 = 1 removes the power prefactors
  R Bcon = (em * r1 - r2) / tri;
};

F50 ccon_oracle() {
  const F50 a = F50(4) / 3, b = F50(2) / 3, abar = 1 - a, tri = sqrt(abar * abar + 4 * b);
  const F50 ratio = (abar + tri) / (2 * b);
  const F50 r3 = F50(4) / 2;
  return 2 / (2 + abar + tri) / (ratio > 1 ? ratio : F50(1)) * (log(F50(2)) + ratio * r3);
}

F50 dcon_oracle() {
  const F50 a = F50(4) / 3, b = F50(2) / 3, abar = 1 - a, tri = sqrt(abar * abar + 4 * b);
  return (abar + tri) / (2 + abar + tri) * (log(F50(2)) - F50(2) / b);
}

}  // namespace

TEST(Validate, A1HoldsWithEqualityAtHeadline) {
  ParameterSet p;
  const auto r = validate(p);
  EXPECT_TRUE(r.ok("A1"));
  EXPECT_DOUBLE_EQ(p.beta0 * p.beta0, a1_rhs(p));
}

TEST(Validate, A1ViolatedForSmallSlope) {
  ParameterSet p;
  p.beta0 = 1;
  EXPECT_FALSE(validate(p).ok("A1"));
  EXPECT_FALSE(validate(p).all_ok());
}

TEST(Validate, HeadlineRangesPassWithUnitMass) {
  ParameterSet p;
  p.m2 = 1;
  const auto r = validate(p);
  EXPECT_TRUE(r.main_ranges_ok());
  EXPECT_TRUE(r.all_ok());
}

TEST(Validate, RangeViolationsReportedNotThrown) {
  ParameterSet p;
  p.a = 31;
  p.c = 1.2;
  ValidationReport r;
  EXPECT_NO_THROW(r = validate(p));
  EXPECT_FALSE(r.ok("a_range"));
  EXPECT_FALSE(r.ok("c_main"));
  EXPECT_TRUE(r.ok("c_ode"));
  EXPECT_TRUE(r.ode_ranges_ok());
}

TEST(Validate, CompactificationExponentRange) {
  ParameterSet p;
  p.A = 2 * p.b / (3 - 2 * p.c);  // open upper end
  EXPECT_FALSE(validate(p).ok("A_range"));
}

TEST(DeriveConstants, ExactRationalsAtHeadline) {
  const ExactHeadline ex;
  EXPECT_EQ(ex.Acon, R(2, 5));
  EXPECT_EQ(ex.Bcon, R(-9, 10));
  const auto d = derive_constants(ParameterSet{});
  EXPECT_NEAR(d.triangle, boost::rational_cast<double>(ex.tri), 1e-15);
  EXPECT_NEAR(d.Acon, boost::rational_cast<double>(ex.Acon), 1e-15);
  EXPECT_NEAR(d.Bcon, boost::rational_cast<double>(ex.Bcon), 1e-15);
  EXPECT_NEAR(d.Econ, 2.0, 1e-15);
  ASSERT_TRUE(d.t_upper.has_value());
  EXPECT_NEAR(*d.t_upper, 8.0, 1e-12);
}

TEST(DeriveConstants, HighPrecisionOracleForC_D) {
  const auto d = derive_constants(ParameterSet{});
  EXPECT_NEAR(d.Ccon, ccon_oracle().convert_to<double>(), 1e-14);
  EXPECT_NEAR(d.Dcon, dcon_oracle().convert_to<double>(), 1e-14);
  // frozen values
  EXPECT_NEAR(d.Ccon, 1.615888308335967, 1e-12);
  EXPECT_NEAR(d.Dcon, -0.9227411277760219, 1e-12);
}

TEST(DeriveConstants, TStarMatchesBisectionOracle) {
  // 0.4/t - 0.9 t^{2/3} + 1 = 0, solved in 50-digit arithmetic
  auto P = [](F50 t) { return F50(2) / 5 / t - F50(9) / 10 * pow(t, F50(2) / 3) + 1; };
  F50 lo = 1, hi = 8;
  for (int i = 0; i < 200; ++i) {
    const F50 mid = (lo + hi) / 2;
    (P(mid) > 0 ? lo : hi) = mid;
  }
  const auto d = derive_constants(ParameterSet{});
  EXPECT_NEAR(d.t_star, lo.convert_to<double>(), 1e-10);
  EXPECT_NEAR(d.t_star, 1.628295557592320, 1e-10);
  EXPECT_EQ(d.t_star_roots.size(), 1u);
  EXPECT_GT(d.t_star, ParameterSet{}.t0);
  EXPECT_LT(d.t_star, *d.t_upper);
}

TEST(DeriveConstants, GeometricSpeedEndpoints) {
  EXPECT_NEAR(b_geometric(1.0 / 3.0, 1.0), 1.0, 1e-15);
  for (double m2 : {0.0, 0.25, 0.5, 1.0}) EXPECT_NEAR(b_geometric(2.0 / 3.0, m2), 2.0, 1e-15);
}

TEST(DeriveConstants, BrevedBetaAndThreshold) {
  const auto d = derive_constants(ParameterSet{});
  EXPECT_NEAR(d.beta_breve, 1.0, 1e-14);
  EXPECT_NEAR(d.blowup_threshold, 2.0, 1e-14);
}

TEST(DeriveConstants, NoRootWithinTinyHorizon) {
  RootOptions ro;
  ro.horizon_factor = 1.1;
  EXPECT_THROW(derive_constants(ParameterSet{}, ro), Error);
}

TEST(DeriveConstants, RejectsOdeRangeViolation) {
  ParameterSet p;
  p.a = 0.5;
  try {
    derive_constants(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Config);
  }
}

TEST(BlowupCondition, StrictThreshold) {
  ParameterSet p;
  EXPECT_TRUE(blowup_condition(p));
  p.beta0 = 2.0;
  EXPECT_FALSE(blowup_condition(p));
  p.beta0 = 1e12;
  EXPECT_TRUE(blowup_condition(p));
}

// Property sweep over the admissible box.
TEST(Properties, SignsAndPositiveStart) {
  for (double a : {1.05, 4.0 / 3.0, 2.0, 5.0, 30.0})
    for (double b : {1.0 / 3.0, 0.5, 2.0 / 3.0})
      for (double beta : {0.1, 1.0, 5.0})
        for (double beta0 : {0.5, 4.0, 50.0}) {
          ParameterSet p;
          p.a = a;
          p.b = b;
          p.beta = beta;
          p.beta0 = beta0;
          RootOptions ro;
          ro.horizon_factor = 1e12;
          DerivedConstants d;
          try {
            d = derive_constants(p, ro);
          } catch (const Error&) {
            // no root inside the horizon is legitimate for slow data
            continue;
          }
          EXPECT_LT(d.Bcon, 0.0);
          EXPECT_GT(d.Ccon, 0.0);
          EXPECT_GT(d.triangle, -d.abar);
          EXPECT_GT(-d.abar, 0.0);
          EXPECT_NEAR(d.upper_denominator(p.t0), 1.0 / (1.0 + p.beta), 1e-12);
          EXPECT_GT(d.t_star, p.t0);
          if (d.t_upper) {
            EXPECT_LT(d.t_star, *d.t_upper);
          }
        }
}

TEST(Properties, QMagnitudeIdentity) {
  for (double b : {1.0 / 3.0, 0.4, 0.5, 2.0 / 3.0})
    for (double m2 : {0.0, 0.3, 0.7, 1.0}) {
      const double q = q_magnitude(b, m2);
      EXPECT_NEAR(q * (2.0 - (2.0 - 3.0 * b) * m2), 606.0, 1e-11);
      if (b == 2.0 / 3.0) {
        EXPECT_NEAR(q, 303.0, 1e-12);
      }
    }
}

TEST(Properties, DeterministicDerivation) {
  const auto d1 = derive_constants(ParameterSet{});
  const auto d2 = derive_constants(ParameterSet{});
  EXPECT_EQ(d1.t_star, d2.t_star);
  EXPECT_EQ(d1.Ccon, d2.Ccon);
  EXPECT_EQ(d1.Dcon, d2.Dcon);
}

TEST(Properties, EnvelopesMeetAtInitialTime) {
  const ParameterSet p;
  const auto d = derive_constants(p);
  EXPECT_NEAR(d.upper_envelope(p.t0), 1.0 + p.beta, 1e-12);
  EXPECT_NEAR(d.lower_envelope(p.t0), 1.0 + p.beta, 1e-12);
}
