#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <boost/rational.hpp>

#include "blowup/fuchsian_system.hpp"

using namespace blowup;

namespace {

ParameterSet headline() {
  ParameterSet p;
  p.m2 = 1.0;
  return p;
}

BasePoint plain_point(double S = 1.3) {
  BasePoint bp;
  bp.S = S;
  bp.chi_over_B = 4.2;
  bp.f = 3.0;
  return bp;
}

std::vector<double> eigen_eigs(const Matrix& m) {
  Eigen::MatrixXd e(m.n, m.n);
  for (std::size_t i = 0; i < m.n; ++i)
    for (std::size_t j = 0; j < m.n; ++j) e(i, j) = m(i, j);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e);
  return {es.eigenvalues().data(), es.eigenvalues().data() + m.n};
}

const CompactifiedTrace& default_trace() {
  static const CompactifiedTrace ct = [] {
    ParameterSet p;
    const auto d = derive_constants(p);
    return build_compactified(integrate(p, d, compactified_options(16385)), p, d);
  }();
  return ct;
}

}  // namespace

TEST(FuchsianConstants, ExactValuesAtBTwoThirds) {
  using R = boost::rational<long long>;
  const R b(2, 3), a(4, 3);
  const auto K = fuchsian_constants(4.0 / 3.0, 2.0 / 3.0, 0.5);
  auto as_d = [](R r) { return boost::rational_cast<double>(r); };
  EXPECT_NEAR(K.D11, as_d(R(300) - 7 * b), 1e-13);
  EXPECT_NEAR(K.D33, as_d(20 * b), 1e-13);
  EXPECT_NEAR(K.D66, as_d(20 * b + 600), 1e-13);
  EXPECT_NEAR(K.D66, 1840.0 / 3.0, 1e-12);
  EXPECT_NEAR(K.D24, as_d(6 * b * (b + 6 * a * b)), 1e-13);
  EXPECT_NEAR(K.D15, as_d(2 * b * (9 * a - 16)), 1e-13);
  EXPECT_NEAR(K.D35, as_d(-24 * b * (2 - a)), 1e-13);
  EXPECT_DOUBLE_EQ(K.q, 303.0);  // 2 - 3b = 0
}

TEST(FuchsianConstants, CrossTermCancelsUnderQFormula) {
  for (double b : {1.0 / 6.0, 0.25, 1.0 / 3.0, 0.5, 2.0 / 3.0})
    for (double m2 : {0.01, 0.3, 0.75, 1.0}) {
      const auto K = fuchsian_constants(1.3, b, m2);
      EXPECT_LT(std::abs(K.As12_1), 1e-12) << b << " " << m2;
      EXPECT_NEAR(K.q * (2 - (2 - 3 * b) * m2), 606.0, 1e-12);
    }
}

TEST(Assemble, SymmetricPartMatchesStatedEntries) {
  ParameterSet p;
  const double zeta = -1.0 / p.delta0 - 0.5;  // phi < 1, phi mu > 0
  const auto e = assemble(p, plain_point(), {}, zeta, 2);
  const auto K = fuchsian_constants(p.a, p.b, p.m2);
  const StateLayout L{2};
  EXPECT_EQ(e.Asym.max_asymmetry(), 0.0);
  EXPECT_EQ(e.A0.max_asymmetry(), 0.0);
  EXPECT_NEAR(e.Asym(0, L.uj(0)), K.As12_1, 1e-12);
  EXPECT_EQ(e.Asym(0, L.uj(1)), 0.0);
  EXPECT_NEAR(e.Asym(0, L.u()), e.phimu * K.As13, 1e-18);
  EXPECT_NEAR(e.Asym(0, L.z()), p.sigma0 * K.As15, 1e-15);
  EXPECT_NEAR(e.Asym(L.uj(1), L.Bl(1)), K.As24, 1e-12);
  EXPECT_NEAR(e.Asym(L.u(), L.z()), e.phieta * K.As35, 1e-18);
  EXPECT_NEAR(e.Asym(L.z(), L.v()), p.sigma0 * K.As35, 1e-15);
  EXPECT_EQ(e.Asym(0, L.v()), 0.0);  // D16 + D31 = 0
}

TEST(Assemble, ZeroStateBlockStructure) {
  ParameterSet p;
  const auto bp = plain_point(1.7);
  const auto e = assemble(p, bp, {}, 50.0, 1);
  const std::vector<double> diag{1, 1.7, 2, 1, 1, 2};
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) EXPECT_EQ(e.A0(i, j), i == j ? diag[i] : 0.0);
  EXPECT_EQ(e.L_script, 0.0);
  EXPECT_NEAR(e.Ai[0](0, 1), bp.S * bp.chi_over_B, 1e-15);
  EXPECT_NEAR(e.Ai[0](1, 1), 200.0 / 101.0 * bp.S, 1e-15);
}

TEST(Assemble, EigenvaluesMatchEigen) {
  ParameterSet p;
  std::vector<double> U{0.01, -0.02, 0.03, 0.005, -0.01, 0.02};
  const auto e = assemble(p, plain_point(), U, -25.0, 1);
  const auto ref = eigen_eigs(e.Asym), ref0 = eigen_eigs(e.A0);
  for (std::size_t i = 0; i < ref.size(); ++i) {
    EXPECT_NEAR(e.eig_Asym[i], ref[i], 1e-10);
    EXPECT_NEAR(e.eig_A0[i], ref0[i], 1e-12);
  }
}

TEST(Assemble, LScriptVanishesOnlyAtZeroState) {
  ParameterSet p;
  const auto bp = plain_point();
  EXPECT_EQ(L_script(p, bp, 0, 0, 0), 0.0);
  EXPECT_NE(L_script(p, bp, 0.1, 0, 0), 0.0);
  // the remainder model perturbs by at most L |U| in spectral norm
  std::vector<double> U(6, 0.01);
  const auto Z = RemainderModel{1.0}(U);
  const auto ev = jacobi_eigenvalues(Z);
  EXPECT_NEAR(std::max(std::abs(ev.front()), std::abs(ev.back())), std::sqrt(6.0) * 0.01, 1e-14);
}

TEST(Assemble, RejectsNonMainStructure) {
  ParameterSet p;
  p.c = 1.2;
  try {
    assemble(p, plain_point(), {}, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.tag(), "UnsupportedParameters");
  }
}

TEST(Cutoff, SupportAndDampedFactors) {
  const double d0 = 0.05;
  EXPECT_EQ(cutoff_phi(-2 / d0 - 1e-9, d0), 0.0);
  EXPECT_EQ(cutoff_phi(-1 / d0, d0), 1.0);
  EXPECT_EQ(cutoff_phi(10, d0), 1.0);
  double prev = -1;
  for (int i = 0; i <= 100; ++i) {
    const double v = cutoff_phi(-2 / d0 + i / (100 * d0), d0);
    EXPECT_GE(v, prev);
    prev = v;
  }
  for (double z = -2 / d0; z < 5; z += 0.37) {
    const auto [pm, pe] = damped_mu_eta(z, 1e-3, d0);
    EXPECT_LE(pm, 1e-3 * (1 + 1e-12));
    EXPECT_NEAR(pe, 1e-3 * pm, 1e-30);
  }
}

TEST(H5, HeadlinePointEigenvalues) {
  const auto t = certify_H5(headline(), SweepBox{{4.0 / 3.0}, {2.0 / 3.0}, {1.0}});
  ASSERT_EQ(t.rows.size(), 1u);
  const auto& r = t.rows[0];
  EXPECT_GT(r.lam_min_Asym, 1.0 / 3.0);
  // the v-row diagonal 20b + 600 bounds the top eigenvalue from below
  EXPECT_GE(r.lam_max_Asym, 1840.0 / 3.0 - 1e-9);
  EXPECT_NEAR(r.kappa, 1.0 / 15.0, 1e-15);
  EXPECT_NEAR(r.gamma1, 2.0, 1e-15);
  EXPECT_NEAR(r.gamma2, 9000.0, 1e-12);
  EXPECT_NEAR(r.S_min, 1.0, 1e-12);  // m2 = k makes S identically 1
  EXPECT_NEAR(r.S_max, 1.0, 1e-12);
  EXPECT_GT(r.gap_lower, 0.0);
  EXPECT_GT(r.gap_mid, 0.0);
  EXPECT_LT(r.gap_upper, 0.0);
  EXPECT_LT(std::abs(r.As12), 1e-12);
}

TEST(H5, SmallMassDegradesLowerConstant) {
  const auto t = certify_H5(ParameterSet{}, SweepBox{{4.0 / 3.0}, {2.0 / 3.0}, {1e-3, 1e-2, 1e-1}});
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_GT(t.rows[0].gamma1, t.rows[1].gamma1);
  EXPECT_GT(t.rows[1].gamma1, t.rows[2].gamma1);
  for (const auto& r : t.rows) EXPECT_GT(r.gap_lower, 0.0);
}

TEST(H5, DefaultSweepLowerBoundsHold) {
  const auto t = certify_H5(ParameterSet{}, SweepBox::default_box());
  ASSERT_EQ(t.rows.size(), 16u * 16u * 8u);
  for (const auto& r : t.rows) {
    EXPECT_GT(r.lam_min_Asym, 1.0 / 3.0);
    EXPECT_GE(r.lam_min_A0, r.m2 / 2);
    EXPECT_GT(r.gap_lower, 0.0);
    EXPECT_GT(r.gap_mid, 0.0);
    EXPECT_LT(std::abs(r.As12), 1e-12);
  }
  EXPECT_THROW(t.require_pass(), Error);  // the gamma2 gap is negative
}

TEST(H5, DeterministicAcrossThreadCounts) {
  const auto box = SweepBox::grid(1.0, 16.0 / 9.0, 3, 1.0 / 6.0, 2.0 / 3.0, 3, 2);
  H5Options one;
  one.threads = 1;
  H5Options many;
  many.threads = 4;
  const auto t1 = certify_H5(ParameterSet{}, box, one), t4 = certify_H5(ParameterSet{}, box, many);
  ASSERT_EQ(t1.rows.size(), t4.rows.size());
  for (std::size_t i = 0; i < t1.rows.size(); ++i) {
    EXPECT_EQ(t1.rows[i].lam_min_Asym, t4.rows[i].lam_min_Asym);
    EXPECT_EQ(t1.rows[i].sandwich_margin, t4.rows[i].sandwich_margin);
  }
}

TEST(H5, MarginsVaryContinuously) {
  const auto box = SweepBox::grid(1.0, 16.0 / 9.0, 8, 1.0 / 6.0, 2.0 / 3.0, 8, 1);
  const auto t = certify_H5(ParameterSet{}, box);
  // Asym does not involve S; its extreme eigenvalues are Lipschitz in (a, b) with constant ~ |dD/db| ~ 700
  for (std::size_t i = 1; i < t.rows.size(); ++i)
    EXPECT_LT(std::abs(t.rows[i].lam_min_Asym - t.rows[i - 1].lam_min_Asym), 700 * 0.5);
}

TEST(H5Extended, AgreesWithClosedFormAtBoundary) {
  const SweepBox box{{16.0 / 9.0}, {1.0 / 3.0, 2.0 / 3.0}, {0.5, 1.0}};
  const auto a = certify_H5(ParameterSet{}, box), b = certify_H5_extended(ParameterSet{}, box);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].lam_min_Asym, b.rows[i].lam_min_Asym);
    EXPECT_EQ(a.rows[i].lam_max_A0, b.rows[i].lam_max_A0);
    EXPECT_TRUE(b.rows[i].found);
    EXPECT_TRUE(b.rows[i].pass);
  }
}

TEST(H5Extended, LargeAExplored) {
  const auto t = certify_H5_extended(ParameterSet{}, SweepBox{{30.0}, {1.0 / 3.0}, {1.0}});
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_TRUE(t.rows[0].found);
  EXPECT_GT(t.rows[0].sandwich_margin, 0.0);
}

TEST(H5Extended, EmptyBox) {
  EXPECT_TRUE(certify_H5_extended(ParameterSet{}, SweepBox{}).rows.empty());
  EXPECT_TRUE(certify_H5(ParameterSet{}, SweepBox{}).rows.empty());
}

TEST(DivB, OrderClasses) {
  const auto r = divB_order_probe(default_trace(), {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}, std::vector<double>(6, 1.0));
  EXPECT_NEAR(r.slope_theta, 0.0, 0.15);
  EXPECT_NEAR(r.slope_a, -1.0, 0.1);
  EXPECT_NEAR(r.slope_b, -1.0, 0.1);
  EXPECT_NEAR(r.slope_c, -1.0, 0.1);
  // the d A0/d tau class is at most (-tau)^{-1/2}
  EXPECT_GE(r.slope_d, -0.5 - 0.15);
  EXPECT_NEAR(r.log_mu_decay[1] - r.log_mu_decay[0], -303.0 / 2.0, 1e-9);
  EXPECT_NEAR(r.log_mu_decay[4] - r.log_mu_decay[3], -4 * 303.0 / 2.0, 1e-9);
}
